#pragma once

#include <cstdint>
#include <span>

#include "cffedsr/dataio.hpp"
#include "cffedsr/seqmodel.hpp"

namespace cffedsr {

// Copies the global embedding into the client's model, then runs `steps`
// SGD passes of next-item prediction over the client's training sequence.
// Each pass visits every position once; negatives are resampled per step
// from the seed. eta == 0 is a no-op on the parameters.
ModelParams fine_tune(const ModelParams& local, const Matrix& global_embedding,
                      std::span<const int> train_sequence, double eta, int steps,
                      int num_negatives, std::uint64_t seed);

// w = gamma * local + (1 - gamma) * global, embedding only; the recurrent
// parameters stay local (they were never transmitted).
ModelParams interpolate(const ModelParams& local, const Matrix& global_embedding, double gamma);

}  // namespace cffedsr
