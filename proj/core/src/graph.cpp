#include "gssl/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>

#include "gssl/errors.hpp"

namespace gssl {

std::size_t TrigramKeyHash::operator()(const TrigramKey& k) const {
  std::hash<std::string> h;
  std::size_t seed = h(k.w1);
  seed ^= h(k.w2) + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
  seed ^= h(k.w3) + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
  return seed;
}

NodeTable extract_trigrams(std::span<const AlignedSentence> corpus, const Lexicon& lexicon) {
  NodeTable table;
  std::unordered_map<TrigramKey, int, TrigramKeyHash> ids;
  table.position_node.resize(corpus.size());
  table.sentence_labeled.resize(corpus.size());
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    const auto& tokens = corpus[s].tokens;
    table.position_node[s].assign(tokens.size(), -1);
    table.sentence_labeled[s] = corpus[s].labeled() ? 1 : 0;
    if (tokens.size() < 3) continue;
    for (std::size_t j = 1; j + 1 < tokens.size(); ++j) {
      TrigramKey key{tokens[j - 1].surface, tokens[j].surface, tokens[j + 1].surface};
      if (key.w1 == lexicon.dummy_boundary() || key.w2 == lexicon.dummy_boundary() ||
          key.w3 == lexicon.dummy_boundary()) {
        continue;
      }
      auto [it, inserted] = ids.try_emplace(key, static_cast<int>(table.nodes.size()));
      if (inserted) table.nodes.push_back(TrigramNode{std::move(key), {}, false});
      auto& node = table.nodes[static_cast<std::size_t>(it->second)];
      node.occurrences.push_back({s, j});
      node.is_labeled = node.is_labeled || corpus[s].labeled();
      table.position_node[s][j] = it->second;
    }
  }
  return table;
}

Context context_of(std::span<const AlignedSentence> corpus, const Occurrence& occ,
                   const Lexicon& lexicon) {
  const auto& tokens = corpus[occ.sentence].tokens;
  Context ctx;
  for (int i = 0; i < 5; ++i) {
    const auto pos = static_cast<std::ptrdiff_t>(occ.center) + i - 2;
    ctx[static_cast<std::size_t>(i)] =
        (pos >= 0 && pos < static_cast<std::ptrdiff_t>(tokens.size()))
            ? std::string_view(tokens[static_cast<std::size_t>(pos)].surface)
            : std::string_view(lexicon.dummy_boundary());
  }
  return ctx;
}

std::vector<std::string> extract_context_features(const Context& c, const Lexicon& lexicon) {
  auto join = [](std::initializer_list<std::string_view> parts) {
    std::string s;
    for (auto p : parts) {
      if (!s.empty()) s += ' ';
      s += p;
    }
    return s;
  };
  std::vector<std::string> out;
  out.reserve(7);
  out.push_back("context=" + join({c[0], c[1], c[2], c[3], c[4]}));
  out.push_back("left=" + join({c[0], c[1]}));
  out.push_back("right=" + join({c[3], c[4]}));
  out.push_back("center=" + std::string(c[2]));
  if (lexicon.is_class(c[2])) out.emplace_back("center_is_class");
  if (lexicon.is_preposition(c[2])) out.emplace_back("center_is_preposition");
  if (lexicon.is_preposition(c[1])) out.emplace_back("left_is_preposition");
  return out;
}

FeatureCounts collect_features(std::span<const AlignedSentence> corpus, const NodeTable& table,
                               const Lexicon& lexicon) {
  FeatureCounts counts;
  std::unordered_map<std::string, int> ids;
  counts.occurrence_features.resize(table.nodes.size());
  for (std::size_t n = 0; n < table.nodes.size(); ++n) {
    for (const auto& occ : table.nodes[n].occurrences) {
      std::vector<int> feats;
      for (auto& f : extract_context_features(context_of(corpus, occ, lexicon), lexicon)) {
        auto [it, inserted] = ids.try_emplace(f, static_cast<int>(counts.feature_names.size()));
        if (inserted) counts.feature_names.push_back(std::move(f));
        feats.push_back(it->second);
      }
      counts.occurrence_features[n].push_back(std::move(feats));
    }
  }
  return counts;
}

std::vector<SparseVector> compute_pmi(const FeatureCounts& counts) {
  const std::size_t n_nodes = counts.occurrence_features.size();
  if (n_nodes == 0) throw ContractError("compute_pmi needs at least one node");
  std::vector<double> feature_total(counts.feature_names.size(), 0.0);
  double total = 0.0;
  for (const auto& node : counts.occurrence_features) {
    for (const auto& occ : node) {
      total += 1.0;
      // A feature fires at most once per occurrence.
      for (int f : occ) feature_total[static_cast<std::size_t>(f)] += 1.0;
    }
  }

  std::vector<SparseVector> vectors(n_nodes);
  for (std::size_t n = 0; n < n_nodes; ++n) {
    const auto& occs = counts.occurrence_features[n];
    const auto node_total = static_cast<double>(occs.size());
    std::vector<int> all;
    for (const auto& occ : occs) all.insert(all.end(), occ.begin(), occ.end());
    std::sort(all.begin(), all.end());
    auto& entries = vectors[n].entries;
    for (std::size_t i = 0; i < all.size();) {
      std::size_t j = i;
      while (j < all.size() && all[j] == all[i]) ++j;
      const auto joint = static_cast<double>(j - i);
      const double pmi = std::log((joint * total) / (node_total * feature_total[static_cast<std::size_t>(all[i])]));
      entries.emplace_back(all[i], pmi);
      i = j;
    }
  }
  return vectors;
}

double cosine_similarity(const SparseVector& u, const SparseVector& v) {
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (const auto& [id, x] : u.entries) nu += x * x;
  for (const auto& [id, x] : v.entries) nv += x * x;
  if (nu == 0.0 || nv == 0.0) return 0.0;
  auto a = u.entries.begin();
  auto b = v.entries.begin();
  while (a != u.entries.end() && b != v.entries.end()) {
    if (a->first < b->first) {
      ++a;
    } else if (b->first < a->first) {
      ++b;
    } else {
      dot += a->second * b->second;
      ++a;
      ++b;
    }
  }
  return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

std::size_t TrigramGraph::num_edges() const {
  std::size_t total = 0;
  for (const auto& adj : adjacency) total += adj.size();
  return total / 2;
}

int TrigramGraph::node_at(std::size_t sentence, std::size_t position) const {
  if (sentence >= position_node.size() || position >= position_node[sentence].size()) return -1;
  return position_node[sentence][position];
}

TrigramGraph build_knn(NodeTable table, std::span<const SparseVector> vectors, int k) {
  const std::size_t n = table.nodes.size();
  if (vectors.size() != n) throw ContractError("one PMI vector per node required");
  if (k < 1) throw ConfigError("k must be >= 1");
  if (n < 2 || static_cast<std::size_t>(k) >= n) {
    throw ConfigError("k = " + std::to_string(k) + " must be smaller than the node count " +
                      std::to_string(n));
  }

  // Nodes sharing no feature have similarity exactly 0 and can never be kept,
  // so candidates come from an inverted index over feature ids.
  int max_feature = -1;
  for (const auto& v : vectors)
    for (const auto& [f, x] : v.entries) max_feature = std::max(max_feature, f);
  std::vector<std::vector<int>> postings(static_cast<std::size_t>(max_feature + 1));
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& [f, x] : vectors[i].entries)
      if (x != 0.0) postings[static_cast<std::size_t>(f)].push_back(static_cast<int>(i));

  std::vector<std::vector<Edge>> chosen(n);
  std::vector<std::size_t> stamp(n, n);
  std::vector<int> candidates;
  std::vector<Edge> scored;
  for (std::size_t i = 0; i < n; ++i) {
    candidates.clear();
    for (const auto& [f, x] : vectors[i].entries) {
      if (x == 0.0) continue;
      for (int j : postings[static_cast<std::size_t>(f)]) {
        if (static_cast<std::size_t>(j) == i || stamp[static_cast<std::size_t>(j)] == i) continue;
        stamp[static_cast<std::size_t>(j)] = i;
        candidates.push_back(j);
      }
    }
    scored.clear();
    for (int j : candidates) {
      const auto lo = std::min<std::size_t>(i, static_cast<std::size_t>(j));
      const auto hi = std::max<std::size_t>(i, static_cast<std::size_t>(j));
      const double sim = cosine_similarity(vectors[lo], vectors[hi]);
      if (sim > 0.0) scored.push_back({j, sim});
    }
    auto better = [](const Edge& a, const Edge& b) {
      return a.weight > b.weight || (a.weight == b.weight && a.neighbor < b.neighbor);
    };
    const auto keep = std::min<std::size_t>(static_cast<std::size_t>(k), scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep), scored.end(), better);
    scored.resize(keep);
    chosen[i] = scored;
  }

  TrigramGraph graph;
  graph.adjacency.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& e : chosen[i]) {
      graph.adjacency[i].push_back(e);
      graph.adjacency[static_cast<std::size_t>(e.neighbor)].push_back({static_cast<int>(i), e.weight});
    }
  }
  for (auto& adj : graph.adjacency) {
    std::sort(adj.begin(), adj.end(), [](const Edge& a, const Edge& b) { return a.neighbor < b.neighbor; });
    adj.erase(std::unique(adj.begin(), adj.end(),
                          [](const Edge& a, const Edge& b) { return a.neighbor == b.neighbor; }),
              adj.end());
  }
  graph.nodes = std::move(table.nodes);
  graph.position_node = std::move(table.position_node);
  graph.sentence_labeled = std::move(table.sentence_labeled);
  graph.k = k;
  return graph;
}

TrigramGraph build_graph(std::span<const AlignedSentence> corpus, const Lexicon& lexicon, int k) {
  if (k < 1) throw ConfigError("k must be >= 1");
  auto table = extract_trigrams(corpus, lexicon);
  const std::size_t n = table.nodes.size();
  if (n < 2) {
    TrigramGraph graph;
    graph.adjacency.resize(n);
    graph.nodes = std::move(table.nodes);
    graph.position_node = std::move(table.position_node);
    graph.sentence_labeled = std::move(table.sentence_labeled);
    graph.k = 0;
    return graph;
  }
  const auto counts = collect_features(corpus, table, lexicon);
  const auto vectors = compute_pmi(counts);
  const int effective_k = std::min<int>(k, static_cast<int>(n) - 1);
  return build_knn(std::move(table), vectors, effective_k);
}

// ---------------------------------------------------------------------------
// Dump format

void write_graph(std::ostream& out, const TrigramGraph& graph) {
  out << "[nodes]\n";
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    const auto& node = graph.nodes[i];
    out << i << '\t' << node.key.joined() << '\t' << node.occurrences.size() << '\t'
        << (node.is_labeled ? 1 : 0) << '\n';
  }
  out << "[edges]\n";
  char buf[32];
  for (std::size_t i = 0; i < graph.adjacency.size(); ++i) {
    for (const auto& e : graph.adjacency[i]) {
      std::snprintf(buf, sizeof(buf), "%.17g", e.weight);
      out << i << '\t' << e.neighbor << '\t' << buf << '\n';
    }
  }
}

GraphDump read_graph_dump(std::istream& in, const std::string& source) {
  GraphDump dump;
  enum { kNone, kNodes, kEdges } section = kNone;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line == "[nodes]") {
      section = kNodes;
      continue;
    }
    if (line == "[edges]") {
      section = kEdges;
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, '\t')) fields.push_back(field);
    try {
      if (section == kNodes && fields.size() == 4) {
        dump.nodes.push_back({std::stoi(fields[0]), fields[1],
                              static_cast<std::size_t>(std::stoull(fields[2])), fields[3] == "1"});
      } else if (section == kEdges && fields.size() == 3) {
        dump.edges.push_back({std::stoi(fields[0]), std::stoi(fields[1]), std::stod(fields[2])});
      } else {
        throw ParseError(source, line_no, "malformed graph dump line");
      }
    } catch (const std::logic_error&) {
      throw ParseError(source, line_no, "malformed number in graph dump");
    }
  }
  return dump;
}

}  // namespace gssl
