#include "mtlab/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mtlab/rng.hpp"

namespace mtlab::corpus {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

bool is_blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(),
                     [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

// Entity type of a label: "B-ORG" -> "ORG", "O" -> "", IO labels pass through.
std::string_view label_type(std::string_view label, Scheme scheme) {
  if (label == "O") return {};
  if (scheme == Scheme::IO) return label;
  return label.substr(2);
}

void check_label(std::string_view label, Scheme scheme, std::size_t line_no) {
  bool ok;
  if (scheme == Scheme::IO) {
    ok = !label.empty() && !label.starts_with("B-") && !label.starts_with("I-");
  } else {
    ok = label == "O" ||
         ((label.starts_with("B-") || label.starts_with("I-")) && label.size() > 2);
  }
  if (!ok)
    throw MalformedLine("line " + std::to_string(line_no) + ": label '" + std::string(label) +
                        "' is not a valid " + std::string(scheme_name(scheme)) + " tag");
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return char(std::tolower(c)); });
  return out;
}

}  // namespace

std::string_view scheme_name(Scheme s) {
  switch (s) {
    case Scheme::IOB1: return "IOB1";
    case Scheme::IOB2: return "IOB2";
    case Scheme::IO: return "IO";
  }
  return "?";
}

Scheme scheme_from_name(std::string_view name) {
  if (name == "IOB1") return Scheme::IOB1;
  if (name == "IOB2") return Scheme::IOB2;
  if (name == "IO") return Scheme::IO;
  throw InvalidConfig("unknown tagging scheme '" + std::string(name) + "'");
}

std::size_t LabeledCorpus::token_count() const {
  std::size_t n = 0;
  for (const auto& s : sentences) n += s.size();
  return n;
}

int LabeledCorpus::label_index(std::string_view type) const {
  for (std::size_t i = 0; i < label_set.size(); ++i)
    if (label_set[i] == type) return int(i);
  return -1;
}

std::vector<int> LabeledCorpus::io_label_indices() const {
  if (scheme != Scheme::IO) throw WrongScheme("label indices require an IO corpus");
  std::unordered_map<std::string_view, int> index;
  for (std::size_t i = 0; i < label_set.size(); ++i) index[label_set[i]] = int(i);
  std::vector<int> out;
  out.reserve(token_count());
  for (const auto& s : sentences)
    for (const auto& t : s) out.push_back(index.at(t.label));
  return out;
}

LabeledCorpus parse_conll(const std::string& text, Scheme scheme) {
  LabeledCorpus c;
  c.scheme = scheme;
  c.label_set.push_back("O");

  std::vector<Token> sentence;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + pos, end - pos);
    ++line_no;
    pos = end + 1;

    if (is_blank(line)) {
      if (!sentence.empty()) {
        c.sentences.push_back(std::move(sentence));
        sentence.clear();
      }
      if (end == text.size()) break;
      continue;
    }
    auto cols = split_ws(line);
    if (cols.size() < 2)
      throw MalformedLine("line " + std::to_string(line_no) + ": expected at least 2 columns");
    std::string_view label = cols.back();
    check_label(label, scheme, line_no);
    auto type = label_type(label, scheme);
    if (!type.empty() && c.label_index(type) < 0) c.label_set.emplace_back(type);
    sentence.push_back({std::string(cols.front()), std::string(label)});
    if (end == text.size()) break;
  }
  if (!sentence.empty()) c.sentences.push_back(std::move(sentence));
  if (c.sentences.empty()) throw EmptyCorpus("corpus contains no tokens");
  return c;
}

std::string to_conll(const LabeledCorpus& c) {
  std::string out;
  for (std::size_t s = 0; s < c.sentences.size(); ++s) {
    if (s > 0) out += '\n';
    for (const auto& t : c.sentences[s]) {
      out += t.surface;
      out += ' ';
      out += t.label;
      out += '\n';
    }
  }
  return out;
}

LabeledCorpus read_conll_file(const std::string& path, Scheme scheme) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UnreadableFile("cannot open corpus file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_conll(buf.str(), scheme);
}

LabeledCorpus convert_iob_to_io(const LabeledCorpus& c) {
  if (c.scheme == Scheme::IO) throw WrongScheme("corpus is already IO-tagged");
  LabeledCorpus out = c;
  out.scheme = Scheme::IO;
  for (auto& sentence : out.sentences)
    for (auto& t : sentence)
      if (t.label != "O") t.label = t.label.substr(2);
  return out;
}

std::vector<std::string> convert_io_to_iob2(const std::vector<std::string>& labels) {
  std::vector<std::string> out;
  out.reserve(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == "O") {
      out.push_back("O");
    } else if (i > 0 && labels[i] == labels[i - 1]) {
      out.push_back("I-" + labels[i]);
    } else {
      out.push_back("B-" + labels[i]);
    }
  }
  return out;
}

std::vector<WindowSample> extract_windows(const LabeledCorpus& c, std::size_t n) {
  if (n > c.token_count())
    throw NotEnoughTokens("requested " + std::to_string(n) + " windows from a corpus of " +
                          std::to_string(c.token_count()) + " tokens");
  std::vector<WindowSample> out;
  out.reserve(n);
  for (const auto& sentence : c.sentences) {
    for (std::size_t i = 0; i < sentence.size(); ++i) {
      if (out.size() == n) return out;
      WindowSample w;
      for (std::size_t k = 0; k < 3; ++k) {
        std::size_t off = 3 - k;  // distance of slot k from center
        w.words[k] = i >= off ? sentence[i - off].surface : std::string();
        w.words[4 + k] = i + k + 1 < sentence.size() ? sentence[i + k + 1].surface : std::string();
      }
      w.words[3] = sentence[i].surface;
      w.center_label = sentence[i].label;
      out.push_back(std::move(w));
    }
  }
  return out;
}

std::vector<double> hashed_vector(std::string_view word, std::size_t dim, std::uint64_t seed) {
  std::vector<double> v(dim);
  SplitRng rng(mix64(fnv1a64(to_lower(word))) ^ mix64(seed));
  const double sd = 1.0 / std::sqrt(double(dim));
  for (auto& x : v) x = sd * rng.next_normal();
  return v;
}

EmbeddingTable EmbeddingTable::hashed(std::size_t dim, std::uint64_t seed) {
  EmbeddingTable t;
  t.dim = dim;
  t.source = Source::Hashed;
  t.seed = seed;
  return t;
}

void EmbeddingTable::embed_into(std::string_view word, double* out) const {
  if (word.empty()) {
    std::fill(out, out + dim, 0.0);
    return;
  }
  if (source == Source::Loaded) {
    auto it = vectors.find(std::string(word));
    if (it != vectors.end()) {
      std::copy(it->second.begin(), it->second.end(), out);
      return;
    }
  }
  auto v = hashed_vector(word, dim, seed);
  std::copy(v.begin(), v.end(), out);
}

std::vector<double> EmbeddingTable::lookup(std::string_view word) const {
  std::vector<double> v(dim);
  embed_into(word, v.data());
  return v;
}

std::vector<double> embed_window(const WindowSample& w, const EmbeddingTable& t) {
  std::vector<double> out(kWindowWidth * t.dim);
  for (std::size_t k = 0; k < kWindowWidth; ++k) t.embed_into(w.words[k], out.data() + k * t.dim);
  return out;
}

EmbeddingTable load_vectors(const std::string& path, std::uint64_t fallback_seed) {
  std::ifstream in(path);
  if (!in) throw UnreadableFile("cannot open vector file '" + path + "'");

  EmbeddingTable t;
  t.source = EmbeddingTable::Source::Loaded;
  t.seed = fallback_seed;
  t.dim = 0;

  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    auto cols = split_ws(line);
    if (first) {
      first = false;
      // "count dim" header: exactly two integer columns
      if (cols.size() == 2) {
        auto is_int = [](std::string_view s) {
          long v;
          auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
          return ec == std::errc() && p == s.data() + s.size();
        };
        if (is_int(cols[0]) && is_int(cols[1])) continue;
      }
    }
    if (cols.size() < 2)
      throw MalformedLine("line " + std::to_string(line_no) + ": expected word and values");
    std::size_t d = cols.size() - 1;
    if (t.dim == 0)
      t.dim = d;
    else if (d != t.dim)
      throw InconsistentDim("line " + std::to_string(line_no) + ": expected " +
                            std::to_string(t.dim) + " values, found " + std::to_string(d));
    std::vector<double> v(d);
    for (std::size_t i = 0; i < d; ++i) {
      auto s = cols[i + 1];
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v[i]);
      if (ec != std::errc() || p != s.data() + s.size())
        throw MalformedLine("line " + std::to_string(line_no) + ": bad number '" +
                            std::string(s) + "'");
    }
    t.vectors.emplace(std::string(cols[0]), std::move(v));
  }
  if (t.vectors.empty()) throw EmptyCorpus("vector file '" + path + "' has no entries");
  return t;
}

}  // namespace mtlab::corpus
