#include "dspt/pinned.hpp"

#include "dspt/noise.hpp"

namespace dspt::pinned {

Instance make(double eta) {
  auto bundle = gen_synthetic(kClasses, kDim, kTrainN, kTestN, kKappa,
                              kAnchorPerturb, kDataSeed);
  if (eta > 0.0) {
    const auto t = TransitionMatrix::symmetric(kClasses, eta);
    apply_noise(bundle.train, t, kNoiseSeed);
  }
  PrototypeModel model(bundle.anchors, kMode, kScale);
  return {std::move(bundle.train), std::move(bundle.test), std::move(model),
          bundle.zero_shot_test_acc, bundle.zero_shot_train_acc};
}

}  // namespace dspt::pinned
