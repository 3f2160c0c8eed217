#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mtlab/errors.hpp"

namespace mtlab::corpus {

enum class Scheme { IOB1, IOB2, IO };

std::string_view scheme_name(Scheme s);
Scheme scheme_from_name(std::string_view name);

struct Token {
  std::string surface;
  std::string label;
};

// Tokenized sentences with per-token labels under a declared tagging scheme.
// Immutable after construction; all operations below return new values.
struct LabeledCorpus {
  std::vector<std::vector<Token>> sentences;
  Scheme scheme = Scheme::IOB1;
  // "O" first, then entity types in order of first appearance.
  std::vector<std::string> label_set;

  std::size_t token_count() const;
  // Position of a type label in label_set, -1 if absent.
  int label_index(std::string_view type) const;
  // Per-token label indices into label_set (IO corpora only).
  std::vector<int> io_label_indices() const;
};

inline constexpr std::size_t kWindowWidth = 7;  // 3 left + center + 3 right

// One training sample: the center word with three words of context on each
// side. Empty strings are the boundary sentinel (token surfaces are never
// empty).
struct WindowSample {
  std::array<std::string, kWindowWidth> words;
  std::string center_label;
};

// word -> dense vector. Hashed tables derive every vector on demand from
// (lowercased surface, dim, seed); loaded tables fall back to the hashed
// vector for unknown words.
struct EmbeddingTable {
  enum class Source { Hashed, Loaded };

  std::size_t dim = 50;
  Source source = Source::Hashed;
  std::uint64_t seed = 0;
  std::unordered_map<std::string, std::vector<double>> vectors;

  static EmbeddingTable hashed(std::size_t dim, std::uint64_t seed);

  // Writes the word's vector into out[0..dim). The sentinel (empty word)
  // embeds to zero.
  void embed_into(std::string_view word, double* out) const;
  std::vector<double> lookup(std::string_view word) const;
};

// Deterministic vector for one word, independent of any table instance.
std::vector<double> hashed_vector(std::string_view word, std::size_t dim, std::uint64_t seed);

// Whitespace-column format: one token per line, label in the last column,
// blank line between sentences.
LabeledCorpus parse_conll(const std::string& text, Scheme scheme = Scheme::IOB1);
std::string to_conll(const LabeledCorpus& c);

LabeledCorpus read_conll_file(const std::string& path, Scheme scheme = Scheme::IOB1);

LabeledCorpus convert_iob_to_io(const LabeledCorpus& c);
// One sentence of IO tags -> IOB2. Adjacent same-type runs merge into one
// span; IO cannot represent the boundary between them.
std::vector<std::string> convert_io_to_iob2(const std::vector<std::string>& labels);

std::vector<WindowSample> extract_windows(const LabeledCorpus& c, std::size_t n);

std::vector<double> embed_window(const WindowSample& w, const EmbeddingTable& t);

// Text format "word v1 ... vd"; an optional first header line "count dim"
// is skipped.
EmbeddingTable load_vectors(const std::string& path, std::uint64_t fallback_seed = 0);

}  // namespace mtlab::corpus
