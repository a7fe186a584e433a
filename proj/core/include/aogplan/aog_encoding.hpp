#pragma once

// Fixed-width vector encoding of a task graph, fed to the or-node selector.
//
// The encoding is the row-major flattened n_max x n_max adjacency matrix
// followed by per-node feature blocks. Adjacency entries: 1 for an and-node
// parenting a child, 2 for an or-node, 0 otherwise. A node feature block is
// the node-type one-hot (and, or, leaf) followed by the primitive-action and
// object one-hots of its atomic action; non-leaf nodes keep those two
// segments at zero. Dead (pruned) and padding node slots are all-zero, so
// pruning only ever zeroes slots and never moves surviving entries.

#include <vector>

#include "aogplan/grammar.hpp"

namespace aogplan::grammar {

struct AogEncodingLayout {
  int n_max = 0;

  static constexpr int kNodeTypeDim = 3;
  static constexpr int node_feat_dim() {
    return kNodeTypeDim + vocab::kNumActionClasses + vocab::kNumObjectClasses;
  }
  int total_dim() const { return n_max * n_max + n_max * node_feat_dim(); }
};

// Layout sized to the largest graph in a catalog.
AogEncodingLayout layout_for(const std::vector<TaskAog>& catalog);

// Throws GrammarError if the graph has more than layout.n_max nodes.
std::vector<double> encode_aog(const TaskAog& aog,
                               const AogEncodingLayout& layout);

}  // namespace aogplan::grammar
