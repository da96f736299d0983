#include <algorithm>
#include <atomic>
#include <charconv>
#include <mutex>
#include <set>
#include <thread>
#include <unordered_map>

#include "precis/error.hpp"
#include "precis/graph.hpp"

namespace precis {

MiningConfig MiningConfig::parse(std::string_view pairing) {
  MiningConfig config;
  if (pairing == "auto") {
    config.pairing = Pairing::automatic;
  } else if (pairing == "adjacent") {
    config.pairing = Pairing::adjacent;
  } else if (pairing == "all" || pairing == "all-pairs") {
    config.pairing = Pairing::all_pairs;
  } else if (pairing.substr(0, 7) == "window:") {
    auto digits = pairing.substr(7);
    std::size_t k = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
    if (ec != std::errc() || ptr != digits.data() + digits.size() || k == 0) {
      throw SyntaxError("window size must be a positive integer", 7);
    }
    config.pairing = Pairing::window;
    config.window = k;
  } else {
    throw SyntaxError("unknown pairing '" + std::string(pairing) + "'", 0);
  }
  return config;
}

TransformationGraph::TransformationGraph(std::vector<GraphNode> nodes, std::vector<GraphEdge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {}

std::vector<std::size_t> TransformationGraph::log_sequence() const {
  std::vector<std::pair<std::size_t, std::size_t>> order;
  for (std::size_t n = 0; n < nodes_.size(); ++n) {
    for (auto i : nodes_[n].log_indexes) order.emplace_back(i, n);
  }
  std::sort(order.begin(), order.end());
  std::vector<std::size_t> out;
  out.reserve(order.size());
  for (const auto& [index, node] : order) out.push_back(node);
  return out;
}

std::size_t TransformationGraph::log_size() const {
  std::size_t total = 0;
  for (const auto& n : nodes_) total += n.multiplicity;
  return total;
}

std::size_t TransformationGraph::find(std::string_view key) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].key == key) return i;
  }
  return nodes_.size();
}

std::map<std::string, std::size_t> TransformationGraph::label_counts() const {
  std::map<std::string, std::size_t> counts;
  for (const auto& e : edges_) ++counts[e.label];
  return counts;
}

bool operator==(const TransformationGraph& a, const TransformationGraph& b) {
  if (a.nodes_.size() != b.nodes_.size() || a.edges_ != b.edges_) return false;
  for (std::size_t i = 0; i < a.nodes_.size(); ++i) {
    const GraphNode& x = a.nodes_[i];
    const GraphNode& y = b.nodes_[i];
    if (x.key != y.key || x.sql != y.sql || x.multiplicity != y.multiplicity ||
        x.log_indexes != y.log_indexes) {
      return false;
    }
  }
  return true;
}

std::vector<std::pair<std::size_t, std::size_t>> select_pairs(const std::vector<std::size_t>& sequence,
                                                              std::size_t distinct, const MiningConfig& config) {
  Pairing pairing = config.pairing;
  if (pairing == Pairing::automatic) {
    pairing = distinct <= config.all_pairs_limit ? Pairing::all_pairs : Pairing::adjacent;
  }
  std::set<std::pair<std::size_t, std::size_t>> pairs;
  if (pairing == Pairing::all_pairs) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t i = 0; i < distinct; ++i) {
      for (std::size_t j = i + 1; j < distinct; ++j) out.emplace_back(i, j);
    }
    return out;
  }
  std::size_t k = pairing == Pairing::adjacent ? 1 : config.window;
  for (std::size_t p = 0; p < sequence.size(); ++p) {
    for (std::size_t q = p + 1; q < sequence.size() && q - p <= k; ++q) {
      std::size_t a = sequence[p];
      std::size_t b = sequence[q];
      if (a != b) pairs.emplace(std::min(a, b), std::max(a, b));
    }
  }
  return {pairs.begin(), pairs.end()};
}

TransformationGraph mine(const std::vector<LogEntry>& log, const StatementLibrary& library,
                         const MiningConfig& config) {
  for (const auto& s : library.statements()) typecheck(s.predicate);

  std::vector<GraphNode> nodes;
  std::unordered_map<std::string, std::size_t> by_key;
  std::vector<std::size_t> sequence;
  for (const auto& entry : log) {
    const std::string& key = entry.ast.canonical_key();
    auto [it, inserted] = by_key.emplace(key, nodes.size());
    if (inserted) nodes.push_back(GraphNode{key, serialize(entry.ast), entry.ast, 0, {}});
    GraphNode& node = nodes[it->second];
    ++node.multiplicity;
    node.log_indexes.push_back(entry.source.log_index);
    sequence.push_back(it->second);
  }

  auto pairs = select_pairs(sequence, nodes.size(), config);
  const auto& statements = library.statements();
  struct Found {
    std::size_t statement;
    GraphEdge edge;
  };
  std::vector<std::vector<Found>> results(pairs.size());

  auto work = [&](std::size_t p) {
    auto [a, b] = pairs[p];
    for (auto [src, dst] : {std::pair{a, b}, std::pair{b, a}}) {
      for (std::size_t s = 0; s < statements.size(); ++s) {
        auto match = evaluate(statements[s], nodes[src].ast, nodes[dst].ast);
        if (!match) continue;
        results[p].push_back(
            {s, GraphEdge{src, dst, match->label, std::move(match->sites), std::move(match->bindings)}});
      }
    }
  };

  unsigned threads = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, pairs.size()));
  if (threads <= 1) {
    for (std::size_t p = 0; p < pairs.size(); ++p) work(p);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        try {
          for (std::size_t p; (p = next.fetch_add(1)) < pairs.size();) work(p);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = pairs.size();
        }
      });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  std::vector<Found> found;
  for (auto& r : results) {
    for (auto& f : r) found.push_back(std::move(f));
  }
  std::sort(found.begin(), found.end(), [](const Found& x, const Found& y) {
    return std::tie(x.edge.src, x.edge.dst, x.statement) < std::tie(y.edge.src, y.edge.dst, y.statement);
  });
  std::vector<GraphEdge> edges;
  edges.reserve(found.size());
  for (auto& f : found) edges.push_back(std::move(f.edge));
  return TransformationGraph(std::move(nodes), std::move(edges));
}

}  // namespace precis
