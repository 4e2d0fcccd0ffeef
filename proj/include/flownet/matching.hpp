#pragma once

#include <cstddef>
#include <queue>
#include <vector>

namespace flownet {

/// Maximum bipartite matching (Hopcroft-Karp) with the matching-side
/// vertex cover read off the final alternating layers.
class BipartiteMatcher {
public:
  BipartiteMatcher(std::size_t n_left, std::size_t n_right)
      : adj_(n_left), n_right_(n_right) {}

  void add_edge(std::size_t l, std::size_t r) { adj_[l].push_back(r); }

  int solve() {
    const std::size_t nl = adj_.size();
    match_left_.assign(nl, -1);
    match_right_.assign(n_right_, -1);
    int matched = 0;
    while (bfs()) {
      for (std::size_t u = 0; u < nl; ++u)
        if (match_left_[u] < 0 && dfs(u)) ++matched;
    }
    bfs();  // final layering for the cover
    return matched;
  }

  const std::vector<int>& match_left() const { return match_left_; }
  const std::vector<int>& match_right() const { return match_right_; }

  /// Minimum vertex cover: left vertices not in the alternating forest
  /// grown from the exposed left side, plus right vertices the forest
  /// enters through non-matching edges.
  void vertex_cover(std::vector<bool>& left_in_cover,
                    std::vector<bool>& right_in_cover) const {
    const std::size_t nl = adj_.size();
    left_in_cover.assign(nl, false);
    right_in_cover.assign(n_right_, false);
    for (std::size_t u = 0; u < nl; ++u) {
      if (dist_[u] == kUnreached) {
        left_in_cover[u] = true;
      } else {
        for (std::size_t r : adj_[u])
          if (match_left_[u] != static_cast<int>(r)) right_in_cover[r] = true;
      }
    }
  }

private:
  static constexpr int kUnreached = -1;

  bool bfs() {
    dist_.assign(adj_.size(), kUnreached);
    std::queue<std::size_t> q;
    for (std::size_t u = 0; u < adj_.size(); ++u)
      if (match_left_[u] < 0) {
        dist_[u] = 0;
        q.push(u);
      }
    bool found_exposed = false;
    while (!q.empty()) {
      const std::size_t u = q.front();
      q.pop();
      for (std::size_t r : adj_[u]) {
        const int w = match_right_[r];
        if (w < 0) {
          found_exposed = true;
        } else if (dist_[static_cast<std::size_t>(w)] == kUnreached) {
          dist_[static_cast<std::size_t>(w)] = dist_[u] + 1;
          q.push(static_cast<std::size_t>(w));
        }
      }
    }
    return found_exposed;
  }

  bool dfs(std::size_t u) {
    for (std::size_t r : adj_[u]) {
      const int w = match_right_[r];
      if (w < 0 || (dist_[static_cast<std::size_t>(w)] == dist_[u] + 1 &&
                    dfs(static_cast<std::size_t>(w)))) {
        match_left_[u] = static_cast<int>(r);
        match_right_[r] = static_cast<int>(u);
        return true;
      }
    }
    dist_[u] = kUnreached;
    return false;
  }

  std::vector<std::vector<std::size_t>> adj_;
  std::size_t n_right_;
  std::vector<int> match_left_;
  std::vector<int> match_right_;
  std::vector<int> dist_;
};

} // namespace flownet
