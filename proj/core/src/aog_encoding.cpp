#include "aogplan/aog_encoding.hpp"

#include <algorithm>

namespace aogplan::grammar {

AogEncodingLayout layout_for(const std::vector<TaskAog>& catalog) {
  AogEncodingLayout layout;
  for (const TaskAog& aog : catalog) {
    layout.n_max = std::max(layout.n_max, aog.node_count());
  }
  return layout;
}

std::vector<double> encode_aog(const TaskAog& aog,
                               const AogEncodingLayout& layout) {
  const int n = layout.n_max;
  if (aog.node_count() > n) {
    throw GrammarError("encode_aog: graph has " +
                       std::to_string(aog.node_count()) +
                       " nodes, layout allows " + std::to_string(n));
  }
  std::vector<double> out(static_cast<size_t>(layout.total_dim()), 0.0);

  for (const AogNode& node : aog.nodes) {
    if (!aog.is_alive(node.id)) continue;
    const size_t row = static_cast<size_t>(node.id) * static_cast<size_t>(n);
    const double connection = node.kind == NodeKind::And   ? 1.0
                              : node.kind == NodeKind::Or  ? 2.0
                                                           : 0.0;
    for (NodeId child : node.children) {
      if (!aog.is_alive(child)) continue;
      out[row + static_cast<size_t>(child)] = connection;
    }

    size_t feat = static_cast<size_t>(n) * static_cast<size_t>(n) +
                  static_cast<size_t>(node.id) *
                      static_cast<size_t>(AogEncodingLayout::node_feat_dim());
    switch (node.kind) {
      case NodeKind::And:
        out[feat + 0] = 1.0;
        break;
      case NodeKind::Or:
        out[feat + 1] = 1.0;
        break;
      case NodeKind::Leaf:
        out[feat + 2] = 1.0;
        out[feat + AogEncodingLayout::kNodeTypeDim +
            static_cast<size_t>(node.action->action)] = 1.0;
        out[feat + AogEncodingLayout::kNodeTypeDim + vocab::kNumActionClasses +
            static_cast<size_t>(node.action->object)] = 1.0;
        break;
    }
  }
  return out;
}

}  // namespace aogplan::grammar
