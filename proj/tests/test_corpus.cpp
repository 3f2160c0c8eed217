#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "mtlab/corpus.hpp"
#include "mtlab/rng.hpp"

using namespace mtlab;
using namespace mtlab::corpus;

TEST_CASE("parse_conll basic") {
  auto c = parse_conll("EU B-ORG\nrejects O\n\nGermany B-LOC\n");
  CHECK(c.sentences.size() == 2);
  CHECK(c.token_count() == 3);
  CHECK(c.label_set == std::vector<std::string>{"O", "ORG", "LOC"});
  CHECK(c.sentences[0][0].surface == "EU");
  CHECK(c.sentences[0][0].label == "B-ORG");
  CHECK(c.scheme == Scheme::IOB1);
}

TEST_CASE("parse_conll keeps last column as label") {
  auto c = parse_conll("EU NNP I-NP B-ORG\n");
  CHECK(c.sentences[0][0].label == "B-ORG");
}

TEST_CASE("parse_conll errors") {
  CHECK_THROWS_AS(parse_conll(""), EmptyCorpus);
  CHECK_THROWS_AS(parse_conll("\n\n"), EmptyCorpus);
  CHECK_THROWS_AS(parse_conll("word\n"), MalformedLine);
  CHECK_THROWS_AS(parse_conll("word X-PER\n"), MalformedLine);  // bad IOB tag
}

TEST_CASE("iob to io") {
  auto c = parse_conll("a B-PER\nb I-PER\nc O\n", Scheme::IOB2);
  auto io = convert_iob_to_io(c);
  CHECK(io.scheme == Scheme::IO);
  CHECK(io.sentences[0][0].label == "PER");
  CHECK(io.sentences[0][1].label == "PER");
  CHECK(io.sentences[0][2].label == "O");
  CHECK_THROWS_AS(convert_iob_to_io(io), WrongScheme);

  auto c2 = convert_iob_to_io(parse_conll("a B-LOC\nb B-LOC\n", Scheme::IOB2));
  CHECK(c2.sentences[0][0].label == "LOC");
  CHECK(c2.sentences[0][1].label == "LOC");

  auto c3 = convert_iob_to_io(parse_conll("a O\nb O\n"));
  CHECK(c3.sentences[0][0].label == "O");
}

TEST_CASE("io to iob2") {
  using V = std::vector<std::string>;
  CHECK(convert_io_to_iob2(V{"PER", "PER", "O"}) == V{"B-PER", "I-PER", "O"});
  CHECK(convert_io_to_iob2(V{"O"}) == V{"O"});
  CHECK(convert_io_to_iob2(V{"LOC", "PER"}) == V{"B-LOC", "B-PER"});
  CHECK(convert_io_to_iob2(V{}) == V{});
}

TEST_CASE("scheme round trip preserves spans without same-type adjacency") {
  // Random IOB2 corpora built so no two same-type entities touch.
  SplitRng rng(7);
  const std::vector<std::string> types = {"PER", "LOC", "ORG"};
  for (int iter = 0; iter < 50; ++iter) {
    std::string text;
    std::vector<std::vector<std::string>> gold;
    for (int s = 0; s < 4; ++s) {
      std::vector<std::string> labels;
      std::string prev_type;  // type of the entity ending at the previous token
      while (labels.size() < 12) {
        if (rng.next_double() < 0.45) {
          labels.push_back("O");
          prev_type.clear();
        } else {
          std::string t = types[rng.next_below(types.size())];
          if (t == prev_type)  // keep same-type entities apart
            for (const auto& alt : types)
              if (alt != prev_type) {
                t = alt;
                break;
              }
          std::size_t len = 1 + rng.next_below(3);
          labels.push_back("B-" + t);
          for (std::size_t k = 1; k < len && labels.size() < 12; ++k) labels.push_back("I-" + t);
          prev_type = t;
        }
      }
      gold.push_back(labels);
      for (const auto& l : labels) text += "w " + l + "\n";
      text += "\n";
    }
    auto c = parse_conll(text, Scheme::IOB2);
    auto io = convert_iob_to_io(c);
    for (std::size_t s = 0; s < io.sentences.size(); ++s) {
      std::vector<std::string> io_labels;
      for (const auto& t : io.sentences[s]) io_labels.push_back(t.label);
      CHECK(convert_io_to_iob2(io_labels) == gold[s]);
    }
  }
}

TEST_CASE("parse / serialize round trip") {
  auto c = parse_conll("EU B-ORG\nrejects O\n\nGermany B-LOC\ncalls O\n");
  auto c2 = parse_conll(to_conll(c));
  CHECK(c2.sentences.size() == c.sentences.size());
  CHECK(to_conll(c2) == to_conll(c));
  CHECK(c2.label_set == c.label_set);
}

TEST_CASE("extract_windows") {
  auto c = parse_conll("a O\nb O\nc O\n");
  auto ws = extract_windows(c, 3);
  REQUIRE(ws.size() == 3);
  // first window: all three left slots are sentinels
  CHECK(ws[0].words[0].empty());
  CHECK(ws[0].words[1].empty());
  CHECK(ws[0].words[2].empty());
  CHECK(ws[0].words[3] == "a");
  CHECK(ws[0].words[4] == "b");
  CHECK(ws[0].words[5] == "c");
  CHECK(ws[0].words[6].empty());
  CHECK(ws[1].words[2] == "a");
  CHECK(ws[1].words[3] == "b");

  CHECK(extract_windows(c, 0).empty());
  CHECK_THROWS_AS(extract_windows(c, 4), NotEnoughTokens);
}

TEST_CASE("extract_windows length equals n") {
  auto c = parse_conll("a O\nb O\n\nc O\nd O\ne O\n\nf O\n");
  for (std::size_t n = 0; n <= c.token_count(); ++n) CHECK(extract_windows(c, n).size() == n);
}

TEST_CASE("windows do not cross sentence boundaries") {
  auto c = parse_conll("a O\nb O\n\nc O\n");
  auto ws = extract_windows(c, 3);
  CHECK(ws[1].words[4].empty());   // nothing right of "b" in its sentence
  CHECK(ws[2].words[2].empty());   // nothing left of "c" in its sentence
}

TEST_CASE("hashed embeddings deterministic") {
  auto t = EmbeddingTable::hashed(50, 42);
  auto v1 = t.lookup("Word");
  auto v2 = t.lookup("word");  // lowercased before hashing
  CHECK(v1 == v2);
  CHECK(v1.size() == 50);

  auto t2 = EmbeddingTable::hashed(50, 42);
  CHECK(t2.lookup("word") == v1);
  CHECK(t2.lookup("word") == v1);

  auto t3 = EmbeddingTable::hashed(50, 43);
  CHECK(t3.lookup("word") != v1);

  // Pinned sample: any process must reproduce this exact stream.
  auto p = hashed_vector("the", 4, 7);
  REQUIRE(p.size() == 4);
  CHECK(p[0] == 0.39450409748979004);
  CHECK(p[1] == -0.075853188674050068);
  CHECK(p[2] == -0.81382615572923878);
  CHECK(p[3] == -0.45562198476343613);
}

TEST_CASE("embed_window") {
  auto t = EmbeddingTable::hashed(8, 1);
  WindowSample w;  // all sentinel
  auto v = embed_window(w, t);
  REQUIRE(v.size() == 7 * 8);
  for (double x : v) CHECK(x == 0.0);

  w.words[3] = "same";
  w.words[4] = "same";
  auto v2 = embed_window(w, t);
  for (std::size_t i = 0; i < 8; ++i) CHECK(v2[3 * 8 + i] == v2[4 * 8 + i]);
  CHECK(embed_window(w, t) == v2);
}

TEST_CASE("load_vectors") {
  const char* path = "vectors_test.txt";
  {
    std::ofstream out(path);
    out << "hello 1 2 3\nworld 0.5 -1 2.5\n";
  }
  auto t = load_vectors(path);
  CHECK(t.dim == 3);
  CHECK(t.vectors.size() == 2);
  CHECK(t.lookup("hello") == std::vector<double>{1, 2, 3});
  // unknown word falls back to the hashed vector
  CHECK(t.lookup("unknown") == hashed_vector("unknown", 3, 0));

  {
    std::ofstream out(path);
    out << "2 3\nhello 1 2 3\nworld 4 5 6\n";
  }
  auto t2 = load_vectors(path);
  CHECK(t2.vectors.size() == 2);
  CHECK(t2.dim == 3);

  {
    std::ofstream out(path);
    out << "hello 1 2 3\nworld 1 2 3 4\n";
  }
  CHECK_THROWS_AS(load_vectors(path), InconsistentDim);

  CHECK_THROWS_AS(load_vectors("no_such_file.txt"), UnreadableFile);
}

TEST_CASE("io_label_indices") {
  auto c = convert_iob_to_io(parse_conll("a B-PER\nb O\nc B-LOC\n"));
  CHECK(c.label_set == std::vector<std::string>{"O", "PER", "LOC"});
  CHECK(c.io_label_indices() == std::vector<int>{1, 0, 2});
}
