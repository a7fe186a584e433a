#pragma once

namespace aogplan::eval {

enum class ExperimentKind {
  Main,            // NN / MLP / RNN / ours w/o aug / ours w/ aug
  Generalization,  // unseen tasks, Table-IV style
  SelfAug,         // AOG augmentation vs self-augmentation
  Curriculum,      // curriculum on/off, clean and corrupted labels
  JointHead,       // factorized vs joint atomic-action head
  Noise,           // clean vs 10% vs 20% negative-ratio features
};

}  // namespace aogplan::eval
