// Generates the bundled synthetic news-wire NER corpus (IOB2, CoNLL layout).
// Entity mentions are drawn from fixed lexicons with a Zipf-like skew so
// frequent names recur early and rare ones keep appearing as the corpus
// grows. A handful of surfaces are deliberately ambiguous between PER and
// LOC and are resolved only by context.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mtlab/rng.hpp"

namespace {

using mtlab::SplitRng;

const std::vector<std::string> kFirstNames = {
    "James",   "Mary",    "Robert",  "Linda",   "Michael", "Elena",   "David",   "Sarah",
    "Carlos",  "Anna",    "Peter",   "Maria",   "Thomas",  "Laura",   "Kenji",   "Aisha",
    "Viktor",  "Ingrid",  "Pablo",   "Chen",    "Dmitri",  "Fatima",  "Henrik",  "Yuki",
    "Omar",    "Greta",   "Luis",    "Priya",   "Stefan",  "Amara",   "Jordan",  "Sydney",
    "Austin",  "Florence","Chad",    "Victoria","Marcus",  "Helena",  "Igor",    "Sofia",
    "Brendan", "Tara",    "Felix",   "Nadia",   "Hugo",    "Irene",   "Oscar",   "Petra",
    "Rafael",  "Wanda",   "Ethan",   "Bianca",  "Gustav",  "Leila",   "Nolan",   "Zara",
    "Patrick", "Mireille","Sergio",  "Annette", "Takeshi", "Rosa",    "Anders",  "Camille",
    "Darius",  "Estelle", "Farid",   "Gloria",  "Horace",  "Ines",    "Jasper",  "Katya",
    "Lionel",  "Marta",   "Nikolai", "Odette",  "Quentin", "Renata",  "Silas",   "Tamara",
    "Ulrich",  "Vera",    "Wendell", "Ximena",  "Yousef",  "Zelda",   "Alvaro",  "Beatrix",
    "Cedric",  "Dagmar"};

const std::vector<std::string> kSurnames = {
    "Smith",    "Johnson",  "Mueller",  "Tanaka",   "Rossi",    "Kowalski", "Novak",
    "Eriksson", "Petrov",   "Sato",     "Garcia",   "Silva",    "Costa",    "Haddad",
    "Okafor",   "Nguyen",   "Kim",      "Larsen",   "Moreau",   "Weber",    "Fischer",
    "Romano",   "Santos",   "Dubois",   "Keller",   "Bauer",    "Fontaine", "Vargas",
    "Holm",     "Berg",     "Castro",   "Lindgren", "Marino",   "Dvorak",   "Stavros",
    "Ibrahim",  "Osei",     "Mbeki",    "Chavez",   "Duarte",   "Ferreira", "Gallo",
    "Hansen",   "Iversen",  "Jansen",   "Kraus",    "Lombardi", "Meier",    "Nilsson",
    "Oliveira", "Pavlov",   "Quiroga",  "Richter",  "Schneider","Tamm",     "Ustinov",
    "Vidal",    "Wagner",   "Yamamoto", "Zimmer"};

const std::vector<std::string> kLocations = {
    "Geneva",    "Oslo",      "Nairobi",  "Lima",      "Prague",   "Manila",   "Cairo",
    "Dublin",    "Havana",    "Kyoto",    "Lagos",     "Madrid",   "Naples",   "Quito",
    "Riga",      "Seoul",     "Tunis",    "Vienna",    "Warsaw",   "Zagreb",   "Athens",
    "Bergen",    "Cusco",     "Dakar",    "Edmonton",  "Florence", "Georgia",  "Helsinki",
    "Istanbul",  "Jakarta",   "Kigali",   "Lisbon",    "Marseille","Nantes",   "Odessa",
    "Porto",     "Quebec",    "Rotterdam","Salzburg",  "Tallinn",  "Uppsala",  "Valencia",
    "Winnipeg",  "Yokohama",  "Zurich",   "Amman",     "Bogota",   "Chengdu",  "Damascus",
    "Esbjerg",   "Fresno",    "Granada",  "Hanoi",     "Izmir",    "Jordan",   "Kandy",
    "Louvain",   "Mumbai",    "Nicosia",  "Orléans",   "Palermo",  "Rabat",    "Santiago",
    "Tbilisi",   "Utrecht",   "Vilnius",  "Washington","Xian",     "Yerevan",  "Zanzibar",
    "Sydney",    "Chad",      "Victoria", "Austin"};

const std::vector<std::string> kOrgBases = {
    "Northbridge", "Solaris",   "Vertex",    "Meridian", "Atlas",     "Pinnacle", "Quantum",
    "Summit",      "Cascade",   "Horizon",   "Keystone", "Lattice",   "Monarch",  "Nimbus",
    "Orion",       "Paragon",   "Redwood",   "Sterling", "Titan",     "Unity",    "Vanguard",
    "Westfield",   "Zenith",    "Apex",      "Borealis", "Crestline", "Dynamo",   "Equinox",
    "Fulcrum",     "Gateway",   "Harbor",    "Ironwood", "Juniper",   "Kestrel",  "Lumina",
    "Mistral",     "Nova",      "Obsidian",  "Polaris",  "Quarry",    "Riverton", "Sequoia",
    "Tundra",      "Umbra",     "Vortex",    "Willow",   "Yardley",   "Zephyr"};

const std::vector<std::string> kOrgSuffixes = {"Corp", "Group", "Bank", "Industries", "Partners",
                                               "Holdings", "Labs", "Airlines"};

const std::vector<std::string> kMisc = {
    "Olympics",  "Euro",      "Ramadan",  "Easter",   "Oscars",    "Marathon", "Grand",
    "Expo",      "Carnival",  "Summit",   "Derby",    "Regatta",   "Biennale", "Festival",
    "German",    "French",    "Japanese", "Brazilian","Kenyan",    "Polish",   "Irish",
    "Egyptian",  "Korean",    "Turkish",  "Mexican",  "Nordic",    "Andean",   "Baltic",
    "Catalan",   "Flemish"};

const std::vector<std::string> kVerbs = {
    "said",     "met",      "visited",   "announced", "rejected", "approved", "signed",
    "warned",   "reported", "confirmed", "denied",    "opened",   "closed",   "praised",
    "urged",    "launched", "acquired",  "toured",    "hosted",   "left",     "joined",
    "criticized", "backed", "suspended"};

const std::vector<std::string> kNouns = {
    "talks",    "officials", "market",   "shares",   "deal",     "plan",      "strike",
    "summit",   "election",  "budget",   "accord",   "protest",  "statement", "meeting",
    "report",   "conference","agreement","figures",  "growth",   "exports",   "prices",
    "minister", "president", "spokesman","delegation","parliament","economy",  "season",
    "match",    "tournament"};

// Zipf-like sampler over a lexicon: weight(rank) = 1 / (rank + 1)^0.9.
class ZipfPicker {
 public:
  explicit ZipfPicker(std::size_t n) {
    cumulative_.reserve(n);
    double acc = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      acc += 1.0 / std::pow(double(r + 1), 0.9);
      cumulative_.push_back(acc);
    }
  }

  std::size_t pick(SplitRng& rng) const {
    const double u = rng.next_double() * cumulative_.back();
    return std::size_t(std::lower_bound(cumulative_.begin(), cumulative_.end(), u) -
                       cumulative_.begin());
  }

 private:
  std::vector<double> cumulative_;
};

struct TokenOut {
  std::string surface;
  std::string label;
};

class Generator {
 public:
  explicit Generator(std::uint64_t seed)
      : rng_(seed),
        first_(kFirstNames.size()),
        sur_(kSurnames.size()),
        loc_(kLocations.size()),
        org_(kOrgBases.size()),
        misc_(kMisc.size()) {}

  std::vector<TokenOut> sentence() {
    std::vector<TokenOut> out;
    const int pattern = int(rng_.next_below(12));
    switch (pattern) {
      case 0:
        person(out); add(out, kVerbs); add(out, {"the"}); add(out, kNouns); add(out, {"in"});
        location(out); date_tail(out); break;
      case 1:
        add(out, {"the"}); org(out); add(out, kVerbs); add(out, {"a"}); add(out, kNouns);
        add(out, {"with"}); org(out); stop(out); break;
      case 2:
        person(out); add(out, {"and"}); person(out); add(out, kVerbs); add(out, {"the"});
        add(out, kNouns); add(out, {"in"}); location(out); stop(out); break;
      case 3:
        add(out, {"officials"}); add(out, {"in"}); location(out); add(out, kVerbs);
        add(out, {"the"}); misc(out); add(out, kNouns); date_tail(out); break;
      case 4:
        add(out, {"the"}); misc(out); add(out, kNouns); add(out, {"opened"}); add(out, {"in"});
        location(out); date_tail(out); break;
      case 5:
        person(out); add(out, {"of"}); org(out); add(out, kVerbs); add(out, {"that"});
        add(out, {"the"}); add(out, kNouns); add(out, kVerbs); stop(out); break;
      case 6:
        add(out, {"shares"}); add(out, {"of"}); org(out); add(out, kVerbs); add(out, {"in"});
        location(out); add(out, {"trading"}); date_tail(out); break;
      case 7:
        add(out, {"the"}); add(out, kNouns); add(out, {"between"}); location(out);
        add(out, {"and"}); location(out); add(out, kVerbs); stop(out); break;
      case 8:
        person(out); add(out, kVerbs); location(out); add(out, {"before"}); add(out, {"the"});
        misc(out); add(out, kNouns); stop(out); break;
      case 9:
        add(out, {"a"}); add(out, kNouns); add(out, {"from"}); add(out, {"the"}); org(out);
        add(out, kVerbs); add(out, {"the"}); add(out, kNouns); date_tail(out); break;
      case 10:
        add(out, {"the"}); misc(out); add(out, kNouns); add(out, {"in"}); location(out);
        add(out, kVerbs); person(out); stop(out); break;
      default:
        person(out); add(out, kVerbs); add(out, {"the"}); add(out, kNouns); add(out, {"of"});
        add(out, {"the"}); org(out); add(out, {"in"}); location(out); stop(out); break;
    }
    return out;
  }

 private:
  void add(std::vector<TokenOut>& out, const std::vector<std::string>& words) {
    out.push_back({words[words.size() == 1 ? 0 : rng_.next_below(words.size())], "O"});
  }

  void stop(std::vector<TokenOut>& out) { out.push_back({".", "O"}); }

  void date_tail(std::vector<TokenOut>& out) {
    add(out, {"on"});
    add(out, {"Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday"});
    stop(out);
  }

  void person(std::vector<TokenOut>& out) {
    out.push_back({kFirstNames[first_.pick(rng_)], "B-PER"});
    if (rng_.next_double() < 0.55) out.push_back({kSurnames[sur_.pick(rng_)], "I-PER"});
  }

  void location(std::vector<TokenOut>& out) {
    if (rng_.next_double() < 0.12) {
      out.push_back({"New", "B-LOC"});
      out.push_back({kLocations[loc_.pick(rng_)], "I-LOC"});
    } else {
      out.push_back({kLocations[loc_.pick(rng_)], "B-LOC"});
    }
  }

  void org(std::vector<TokenOut>& out) {
    const double u = rng_.next_double();
    if (u < 0.4) {
      out.push_back({kOrgBases[org_.pick(rng_)], "B-ORG"});
    } else if (u < 0.85) {
      out.push_back({kOrgBases[org_.pick(rng_)], "B-ORG"});
      out.push_back({kOrgSuffixes[rng_.next_below(kOrgSuffixes.size())], "I-ORG"});
    } else {
      out.push_back({"Bank", "B-ORG"});
      out.push_back({"of", "I-ORG"});
      out.push_back({kLocations[loc_.pick(rng_)], "I-ORG"});
    }
  }

  void misc(std::vector<TokenOut>& out) {
    if (rng_.next_double() < 0.1) {
      out.push_back({"World", "B-MISC"});
      out.push_back({"Cup", "I-MISC"});
    } else {
      out.push_back({kMisc[misc_.pick(rng_)], "B-MISC"});
    }
  }

  SplitRng rng_;
  ZipfPicker first_, sur_, loc_, org_, misc_;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"synthetic NER corpus generator"};
  std::string out = "data/mtl_news.conll";
  std::size_t tokens = 30000;
  std::uint64_t seed = 1996;
  app.add_option("--out", out, "output path");
  app.add_option("--tokens", tokens, "minimum token count");
  app.add_option("--seed", seed, "random seed");
  CLI11_PARSE(app, argc, argv);

  Generator gen(seed);
  std::ofstream file(out, std::ios::trunc | std::ios::binary);
  if (!file) {
    std::cerr << "cannot write " << out << "\n";
    return 1;
  }
  std::size_t written = 0;
  bool first = true;
  while (written < tokens) {
    if (!first) file << "\n";
    first = false;
    for (const auto& tok : gen.sentence()) {
      file << tok.surface << " " << tok.label << "\n";
      ++written;
    }
  }
  std::cerr << "wrote " << written << " tokens to " << out << "\n";
  return 0;
}
