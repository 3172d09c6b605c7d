#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gssl/corpus.hpp"

namespace gssl {

struct TrigramKey {
  std::string w1, w2, w3;

  std::string joined() const { return w1 + ' ' + w2 + ' ' + w3; }
  friend bool operator==(const TrigramKey&, const TrigramKey&) = default;
};

struct TrigramKeyHash {
  std::size_t operator()(const TrigramKey& k) const;
};

struct Occurrence {
  std::size_t sentence = 0;
  std::size_t center = 0;  // position of w2 in the unpadded sentence

  friend bool operator==(const Occurrence&, const Occurrence&) = default;
};

struct TrigramNode {
  TrigramKey key;
  std::vector<Occurrence> occurrences;
  bool is_labeled = false;
};

// Trigram types of a corpus in first-appearance order, with a lookup from
// (sentence, position) to the node centered there.
struct NodeTable {
  std::vector<TrigramNode> nodes;
  std::vector<std::vector<int>> position_node;  // -1 where no node is centered
  std::vector<char> sentence_labeled;
};

// Pads each sentence with two boundary tokens per side and keeps every
// trigram whose three tokens are real tokens.
NodeTable extract_trigrams(std::span<const AlignedSentence> corpus, const Lexicon& lexicon);

using Context = std::array<std::string_view, 5>;

// Five-token window x1..x5 around the occurrence; padding reads the
// lexicon's boundary symbol.
Context context_of(std::span<const AlignedSentence> corpus, const Occurrence& occ,
                   const Lexicon& lexicon);

// Context features: full context, left pair, right pair, center word, and
// the IsClass(x3) / IsPreposition(x3) / IsPreposition(x2) indicators when true.
std::vector<std::string> extract_context_features(const Context& context, const Lexicon& lexicon);

// Sparse vector sorted by feature id.
struct SparseVector {
  std::vector<std::pair<int, double>> entries;

  bool empty() const { return entries.empty(); }
};

// Interned context-feature vocabulary plus occurrence-level feature lists.
struct FeatureCounts {
  std::vector<std::string> feature_names;
  // For each node, for each occurrence, the ids of its features.
  std::vector<std::vector<std::vector<int>>> occurrence_features;
};

FeatureCounts collect_features(std::span<const AlignedSentence> corpus, const NodeTable& table,
                               const Lexicon& lexicon);

// PMI(t, f) = log(c(t,f) * N / (c(t) * c(f))) with c(t) the occurrences of t,
// c(f) the occurrences (over all nodes) exhibiting f and N all occurrences.
// Entries exist exactly where c(t,f) > 0.
std::vector<SparseVector> compute_pmi(const FeatureCounts& counts);

double cosine_similarity(const SparseVector& u, const SparseVector& v);

struct Edge {
  int neighbor = 0;
  double weight = 0.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct TrigramGraph {
  std::vector<TrigramNode> nodes;
  std::vector<std::vector<Edge>> adjacency;  // sorted by neighbor id, symmetric
  std::vector<std::vector<int>> position_node;
  std::vector<char> sentence_labeled;
  int k = 0;

  std::size_t size() const { return nodes.size(); }
  std::size_t num_edges() const;  // undirected
  // Node centered at (sentence, position), or -1.
  int node_at(std::size_t sentence, std::size_t position) const;
};

// Keeps each node's k most similar nodes (ties to the lower id), drops
// non-positive similarities and symmetrizes by union.
TrigramGraph build_knn(NodeTable table, std::span<const SparseVector> vectors, int k);

inline constexpr int kDefaultNeighbors = 10;

// Extract, featurize, PMI and k-NN in one call. k is clamped to n-1 when
// the corpus yields fewer than k+1 nodes; an empty node table gives an
// empty graph.
TrigramGraph build_graph(std::span<const AlignedSentence> corpus, const Lexicon& lexicon, int k);

// Node section "id<TAB>w1 w2 w3<TAB>count<TAB>0|1", edge section
// "id<TAB>id<TAB>weight" with both directions listed.
void write_graph(std::ostream& out, const TrigramGraph& graph);

struct GraphDump {
  struct Node {
    int id;
    std::string trigram;
    std::size_t occurrences;
    bool labeled;
  };
  struct DumpEdge {
    int from, to;
    double weight;
  };
  std::vector<Node> nodes;
  std::vector<DumpEdge> edges;
};

GraphDump read_graph_dump(std::istream& in, const std::string& source = "<stream>");

}  // namespace gssl
