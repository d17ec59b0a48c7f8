#include <algorithm>
#include <unordered_map>

#include "cas/kb_graph.hpp"

namespace cas {

bool traversable(Relation relation, Direction direction, Traversal traversal) {
  if (traversal == Traversal::kUndirected) return true;
  switch (relation_info(relation).arrow) {
    case Arrow::kBoth:
      return true;
    case Arrow::kForward:
      return direction == Direction::kForward;
    case Arrow::kBackward:
      return direction == Direction::kReverse;
  }
  return false;
}

namespace {

using TermId = KnowledgeGraph::TermId;
using Step = KnowledgeGraph::Step;

Direction flip(Direction d) { return d == Direction::kForward ? Direction::kReverse : Direction::kForward; }

// Lower bounds on the hop distance from any node to the target, from a
// breadth-first search backwards out of the target. The search stops growing
// once a layer would exceed kBallLimit nodes; nodes outside the explored ball
// are then bounded by the last complete radius + 1.
class DistanceBound {
 public:
  static constexpr std::size_t kBallLimit = 1 << 18;

  DistanceBound(const KnowledgeGraph& g, TermId target, std::size_t radius, Traversal traversal) {
    dist_.emplace(target, 0);
    std::vector<TermId> frontier{target};
    for (std::size_t layer = 1; layer <= radius && !frontier.empty(); ++layer) {
      std::vector<TermId> next;
      for (TermId v : frontier) {
        for (const Step& s : g.steps(v)) {
          const Relation rel = g.raw_edges()[s.edge].relation;
          if (!traversable(rel, flip(s.direction), traversal)) continue;
          if (dist_.emplace(s.neighbor, layer).second) next.push_back(s.neighbor);
        }
        if (dist_.size() > kBallLimit) return;
      }
      complete_ = layer;
      frontier = std::move(next);
    }
    // Everything reachable within `radius` has been seen.
    complete_ = radius;
  }

  std::size_t lower_bound(TermId v) const {
    auto it = dist_.find(v);
    return it == dist_.end() ? complete_ + 1 : it->second;
  }

 private:
  std::unordered_map<TermId, std::size_t> dist_;
  std::size_t complete_ = 0;
};

class PathEnumerator {
 public:
  PathEnumerator(const KnowledgeGraph& g, TermId source, TermId target, const PathQuery& query)
      : g_(g),
        source_(source),
        target_(target),
        query_(query),
        bound_(g, target, query.max_hops - 1, query.traversal) {}

  std::vector<KGPath> run() {
    on_path_.push_back(source_);
    visit(source_, 0);
    return std::move(out_);
  }

 private:
  bool full() const { return query_.max_paths != 0 && out_.size() >= query_.max_paths; }

  void visit(TermId node, std::size_t depth) {
    const auto steps = g_.steps(node);
    std::size_t i = 0;
    while (i < steps.size() && !full()) {
      const TermId neighbor = steps[i].neighbor;
      std::vector<const Step*> group;
      for (; i < steps.size() && steps[i].neighbor == neighbor; ++i) {
        const Relation rel = g_.raw_edges()[steps[i].edge].relation;
        if (traversable(rel, steps[i].direction, query_.traversal)) group.push_back(&steps[i]);
      }
      if (group.empty()) continue;

      if (neighbor == target_) {
        hops_.push_back(std::move(group));
        emit();
        hops_.pop_back();
        continue;
      }
      if (depth + 1 >= query_.max_hops) continue;
      if (std::find(on_path_.begin(), on_path_.end(), neighbor) != on_path_.end()) continue;
      if (depth + 1 + bound_.lower_bound(neighbor) > query_.max_hops) continue;

      hops_.push_back(std::move(group));
      on_path_.push_back(neighbor);
      visit(neighbor, depth + 1);
      on_path_.pop_back();
      hops_.pop_back();
    }
  }

  // Expands parallel edges of the current node path in lexicographic order.
  void emit() {
    std::vector<std::size_t> pick(hops_.size(), 0);
    while (!full()) {
      KGPath path;
      path.source = g_.term(source_);
      path.target = g_.term(target_);
      path.steps.reserve(hops_.size());
      for (std::size_t h = 0; h < hops_.size(); ++h) {
        const Step* s = hops_[h][pick[h]];
        path.steps.push_back({g_.edge(s->edge), s->direction});
      }
      out_.push_back(std::move(path));

      std::size_t h = hops_.size();
      while (h > 0) {
        --h;
        if (++pick[h] < hops_[h].size()) break;
        pick[h] = 0;
        if (h == 0) return;
      }
      if (hops_.empty()) return;
    }
  }

  const KnowledgeGraph& g_;
  TermId source_;
  TermId target_;
  PathQuery query_;
  DistanceBound bound_;
  std::vector<TermId> on_path_;
  std::vector<std::vector<const Step*>> hops_;
  std::vector<KGPath> out_;
};

}  // namespace

std::vector<KGPath> find_paths(const KnowledgeGraph& graph, std::string_view a, std::string_view q,
                               const PathQuery& query) {
  if (query.max_hops == 0) return {};
  const auto source = graph.find(a);
  const auto target = graph.find(q);
  if (!source || !target || *source == *target) return {};
  return PathEnumerator(graph, *source, *target, query).run();
}

}  // namespace cas
