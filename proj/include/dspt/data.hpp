#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dspt/noise.hpp"
#include "dspt/numerics.hpp"

namespace dspt {

enum class Split { Train, Test };

// Unit-norm feature rows with clean labels, noisy labels and the corruption
// mask. Immutable once validated; shareable across threads.
struct Dataset {
  Vec features;                     // n x d row-major, unit rows
  std::vector<int> clean;
  std::vector<int> noisy;
  std::vector<std::uint8_t> mask;   // mask[i] = (clean[i] != noisy[i])
  int classes = 0;
  int dim = 0;
  long n = 0;
  Split split = Split::Train;

  std::span<const double> feature(long i) const {
    return {features.data() + static_cast<size_t>(i) * dim,
            static_cast<size_t>(dim)};
  }

  // Re-checks every invariant; throws DataFormatError/InvalidInputError.
  void validate() const;
};

struct SyntheticBundle {
  Dataset train;
  Dataset test;
  std::vector<Vec> anchors;          // C unit rows, d wide
  double zero_shot_train_acc = 0.0;  // anchors vs clean labels
  double zero_shot_test_acc = 0.0;
  std::optional<std::string> warning;
};

// Class means uniform on the unit sphere; sample = normalize(mean_y + g/sqrt(kappa));
// anchors = normalize(mean_c + anchor_perturb * g'). Labels drawn uniformly.
// Deterministic per seed.
SyntheticBundle gen_synthetic(int classes, int dim, long n_train, long n_test,
                              double kappa, double anchor_perturb,
                              std::uint64_t seed);

// DSPT-EMB v1: "DSPTEMB1" magic, u32 n, u32 d, u32 C (little-endian),
// n*d float32 row-major features, n*u32 clean labels.
Dataset load_embeddings(const std::string& path);
void save_embeddings(const Dataset& ds, const std::string& path);

// CSV alternative, header "label,f0,...,f{d-1}"; classes = max label + 1.
// Floats parsed with round-trip std::from_chars semantics.
Dataset load_embeddings_csv(const std::string& path);

// Applies label corruption to a train split in place (noisy + mask filled).
NoiseReport apply_noise(Dataset& ds, const TransitionMatrix& t,
                        std::uint64_t seed);

// Deterministic per-(seed, epoch) shuffle of 0..n-1; every index exactly once.
std::vector<long> epoch_permutation(long n, std::uint64_t seed, int epoch);

// Slices a permutation into batches of batch_size; the last may be short.
std::vector<std::span<const long>> batch_slices(std::span<const long> perm,
                                                long batch_size);

}  // namespace dspt
