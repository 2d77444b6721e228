#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "lingua/catalog.hpp"
#include "lingua/io.hpp"
#include "lingua/lexicon.hpp"
#include "oracles.hpp"

using namespace lingua;

namespace {

MetaSymbolDef def(std::string id, std::vector<std::string> members, std::string category = "area") {
  return {id, id, std::move(category), std::move(members), std::nullopt};
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

RealTable row_table(std::vector<double> values) {
  RealTable t(ResponseShape({values.size()}));
  for (std::size_t r = 0; r < values.size(); ++r) t(0, r) = values[r];
  return t;
}

GlobalBaseline gardening() {
  return {row_table({0.45, 0.37, 0.18}), 1000};
}

}  // namespace

TEST_CASE("flatten") {
  const auto lex = Lexicon::build({def("A", {"S1", "S2"}), def("B", {"A", "S2", "S3"}),
                                   def("C", {"S1"})},
                                  {"S1", "S2", "S3"});
  CHECK(flatten("C", lex) == std::set<std::string>{"S1"});
  CHECK(flatten("B", lex) == std::set<std::string>{"S1", "S2", "S3"});
  CHECK(flatten("S2", lex) == std::set<std::string>{"S2"});
  CHECK(code_of([&] { flatten("nope", lex); }) == ErrorCode::UnknownId);
}

TEST_CASE("flatten on random DAGs matches reachability") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::set<std::string> base;
    for (int i = 0; i < 12; ++i) base.insert("b" + std::to_string(i));
    std::vector<MetaSymbolDef> defs;
    std::vector<std::string> pool(base.begin(), base.end());
    // Three levels: each def draws from everything defined before it.
    for (int level = 0; level < 3; ++level) {
      std::vector<std::string> added;
      for (int i = 0; i < 4; ++i) {
        std::vector<std::string> members;
        std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
        for (int m = 0; m < 3; ++m) members.push_back(pool[pick(rng)]);
        const std::string id = "m" + std::to_string(level) + "_" + std::to_string(i);
        defs.push_back(def(id, members));
        added.push_back(id);
      }
      pool.insert(pool.end(), added.begin(), added.end());
    }
    const auto lex = Lexicon::build(defs, base);
    std::map<std::string, std::vector<std::string>> edges;
    for (const auto& d : defs) edges[d.id] = d.members;
    for (const auto& d : defs) {
      // Enumerate every path from d down to base symbols.
      std::set<std::string> reached;
      std::vector<std::string> stack{d.id};
      while (!stack.empty()) {
        const auto id = stack.back();
        stack.pop_back();
        if (base.count(id)) {
          reached.insert(id);
          continue;
        }
        for (const auto& m : edges[id]) stack.push_back(m);
      }
      CHECK(flatten(d.id, lex) == reached);
    }
    // An unrelated definition never changes existing results.
    auto more = defs;
    more.push_back(def("extra", {"b0", "b1"}));
    const auto lex2 = Lexicon::build(more, base);
    for (const auto& d : defs) CHECK(flatten(d.id, lex2) == flatten(d.id, lex));
  }
}

TEST_CASE("lexicon validation lists every issue") {
  const std::set<std::string> base{"S1", "S2"};
  const std::vector<MetaSymbolDef> defs{
      def("A", {"B"}), def("B", {"A"}),         // cycle 1
      def("C", {"D"}), def("D", {"E"}), def("E", {"C"}),  // cycle 2
      def("F", {"F"}),                          // self reference
      def("G", {}),                             // empty
      def("H", {"S1", "ghost", "phantom"}),     // two unknowns
      def("S2", {"S1"}),                        // collides with a base id
      def("A", {"S1"}),                         // duplicate
  };
  const auto issues = Lexicon::check(defs, base);
  std::map<ErrorCode, int> by_code;
  for (const auto& issue : issues) ++by_code[issue.code];
  CHECK(by_code[ErrorCode::CycleDetected] == 2);
  CHECK(by_code[ErrorCode::SelfReference] == 1);
  CHECK(by_code[ErrorCode::EmptyDefinition] == 1);
  CHECK(by_code[ErrorCode::UnknownId] == 2);
  CHECK(by_code[ErrorCode::DuplicateId] >= 2);
  try {
    Lexicon::build(defs, base);
    FAIL("expected InvalidLexicon");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidLexicon);
    CHECK(e.detail().find("ghost") != std::string::npos);
    CHECK(e.detail().find("phantom") != std::string::npos);
  }
  CHECK(Lexicon::check({def("A", {"S1"}), def("B", {"A", "S2"})}, base).empty());
}

TEST_CASE("flatten reports cycles on unchecked lexicons") {
  const auto lex = Lexicon::unchecked({def("A", {"B"}), def("B", {"C"}), def("C", {"A"})});
  try {
    flatten("A", lex);
    FAIL("expected CycleDetected");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CycleDetected);
    CHECK(e.detail().find("A") != std::string::npos);
    CHECK(e.detail().find("C") != std::string::npos);
  }
}

TEST_CASE("topological order puts members first") {
  const auto lex = Lexicon::build(
      {def("top", {"mid", "x"}), def("mid", {"low"}), def("low", {"x"}), def("side", {"y"})},
      {"x", "y"});
  const auto order = lex.topological_order();
  auto pos = [&](const std::string& id) {
    return std::find(order.begin(), order.end(), id) - order.begin();
  };
  CHECK(order.size() == 4);
  CHECK(pos("low") < pos("mid"));
  CHECK(pos("mid") < pos("top"));
}

TEST_CASE("materialize deduplicates by user") {
  const auto s = SurveySchema::with_default_options(2);
  std::vector<InteractionRecord> records;
  // s1: users 0..9, s2: users 5..14 -> 5 shared
  for (int u = 0; u < 15; ++u) {
    std::set<std::string> sat;
    if (u < 10) sat.insert("s1");
    if (u >= 5) sat.insert("s2");
    if (u >= 20) sat.insert("s3");
    records.push_back({"u" + std::to_string(u), {{u % 3, (u / 3) % 3}}, sat});
  }
  for (int u = 15; u < 40; ++u)
    records.push_back({"u" + std::to_string(u), {{u % 3, 1}}, {u < 25 ? "d1" : "d2"}});
  const auto store = ingest(records, s);
  const auto lex = Lexicon::build({def("pair", {"s1", "s2"}), def("dup", {"s1", "s1", "s2"}),
                                   def("one", {"s1"}), def("disjoint", {"d1", "d2"}),
                                   def("nested", {"pair", "s2"})},
                                  store.symbol_ids());

  const auto pair = materialize("pair", lex, store);
  CHECK(pair.user_count() == 15);
  const auto expect = oracle::recount(records, {"s1", "s2"}, {3, 3});
  for (std::size_t q = 0; q < 2; ++q)
    for (std::size_t r = 0; r < 3; ++r) CHECK(pair.counts(q, r) == expect[q][r]);

  CHECK(materialize("dup", lex, store).counts == pair.counts);
  CHECK(materialize("nested", lex, store).counts == pair.counts);
  CHECK(materialize("one", lex, store).counts == store.symbol("s1").counts);

  const auto disjoint = materialize("disjoint", lex, store);
  CHECK(disjoint.user_count() == 25);
  for (std::size_t q = 0; q < 2; ++q)
    for (std::size_t r = 0; r < 3; ++r)
      CHECK(disjoint.counts(q, r) ==
            store.symbol("d1").counts(q, r) + store.symbol("d2").counts(q, r));

  // Monotone and subadditive.
  CHECK(pair.user_count() <= store.symbol("s1").user_count() + store.symbol("s2").user_count());
  CHECK(pair.user_count() >= store.symbol("s1").user_count());

  const auto loose = Lexicon::unchecked({def("bad", {"s1", "missing"})});
  CHECK(code_of([&] { materialize("bad", loose, store); }) == ErrorCode::UnknownBaseSymbol);
}

TEST_CASE("signal arithmetic") {
  const auto b = gardening();
  const auto signal = signal_of(row_table({30, 40, 30}), 100, b);
  CHECK(signal(0, 0) == doctest::Approx(-15));
  CHECK(signal(0, 1) == doctest::Approx(3));
  CHECK(signal(0, 2) == doctest::Approx(12));
  const auto zero = signal_of(row_table({45, 37, 18}), 100, b);
  for (double v : zero.cells()) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("inversion arithmetic") {
  const auto b = gardening();
  const ResponseShape shape({3});
  SymbolHistory h{"s", std::vector<std::uint32_t>(100), CountTable(shape)};
  std::iota(h.users.begin(), h.users.end(), 0);
  h.counts(0, 0) = 30;
  h.counts(0, 1) = 40;
  h.counts(0, 2) = 30;
  const auto inv = invert(h, b);
  CHECK(inv.pseudo_counts(0, 0) == doctest::Approx(60));
  CHECK(inv.pseudo_counts(0, 1) == doctest::Approx(34));
  CHECK(inv.pseudo_counts(0, 2) == doctest::Approx(6));
  CHECK(inv.user_count == 100);
  const auto pp = pseudo_probabilities(inv);
  CHECK(pp(0, 0) == doctest::Approx(0.60));
  CHECK(pp(0, 1) == doctest::Approx(0.34));
  CHECK(pp(0, 2) == doctest::Approx(0.06));
  CHECK(inverse_id("area_01") == "inverse:area_01");
  CHECK(inverse_category("area") == "inverse:area");

  // Negative pseudo-counts are allowed.
  const GlobalBaseline tenth{row_table({0.1, 0.1, 0.8}), 100};
  h.counts(0, 0) = 0;
  h.counts(0, 1) = 30;
  h.counts(0, 2) = 70;
  const auto edge = invert(h, tenth);
  CHECK(edge.pseudo_counts(0, 0) == doctest::Approx(20));
  CHECK(edge.pseudo_counts(0, 1) == doctest::Approx(-10));
  CHECK(edge.pseudo_counts(0, 2) == doctest::Approx(90));

  InverseHistory manual{"m", row_table({-10, 60, 50}), 100};
  const auto mp = pseudo_probabilities(manual);
  CHECK(mp(0, 0) == doctest::Approx(-0.1));
  CHECK(mp(0, 0) + mp(0, 1) + mp(0, 2) == doctest::Approx(1.0));

  InverseHistory empty{"e", row_table({0, 0, 0}), 0};
  CHECK(code_of([&] { pseudo_probabilities(empty); }) == ErrorCode::EmptySymbol);
}

TEST_CASE("zero-signal symbol is its own inverse; rows keep their totals") {
  std::mt19937_64 rng(9);
  const auto s = fixture::schema(4, 3);
  const auto records = fixture::records(rng, s, 200, 6);
  const auto store = ingest(records, s);
  for (const auto& [id, h] : store.symbols()) {
    const auto inv = invert(h, store.baseline());
    const auto signal = signal_of(h, store.baseline());
    for (std::size_t q = 0; q < 4; ++q) {
      double row = 0.0, srow = 0.0;
      for (std::size_t r = 0; r < 3; ++r) {
        row += inv.pseudo_counts(q, r);
        srow += signal(q, r);
        CHECK(inv.pseudo_counts(q, r) == doctest::Approx(h.counts(q, r) - 2.0 * signal(q, r)));
      }
      CHECK(row == doctest::Approx(double(h.user_count())));
      CHECK(std::abs(srow) < 1e-9 * double(h.user_count()));
    }
  }
  // Baseline-shaped history.
  const ResponseShape shape({3});
  SymbolHistory flat{"f", std::vector<std::uint32_t>(100), CountTable(shape)};
  flat.counts(0, 0) = 45;
  flat.counts(0, 1) = 37;
  flat.counts(0, 2) = 18;
  const auto self = invert(flat, gardening());
  CHECK(self.pseudo_counts(0, 0) == doctest::Approx(45));
  CHECK(self.pseudo_counts(0, 2) == doctest::Approx(18));
}

TEST_CASE("catalog builds base, meta, and inverse entries") {
  std::mt19937_64 rng(21);
  const auto s = fixture::schema(3, 3);
  const auto records = fixture::records(rng, s, 100, 5, 0.3);
  auto store = std::make_shared<const HistoryStore>(ingest(records, s));
  const auto lex = Lexicon::build({def("a", {"s0", "s1"}), def("b", {"a", "s2"}, "major"),
                                   {"c", "C", "career", {"s3", "s4"}, 7}},
                                  store->symbol_ids());
  const auto catalog = Catalog::build(store, lex);
  CHECK(catalog.find("s0")->kind == SymbolKind::base);
  CHECK(catalog.find("s0")->category == "base");
  CHECK(catalog.at("a").abstraction_level == 1);
  CHECK(catalog.at("b").abstraction_level == 2);
  CHECK(catalog.at("c").abstraction_level == 7);
  CHECK(catalog.at("b").member_count == 3);
  const auto& inv = catalog.at("inverse:b");
  CHECK(inv.kind == SymbolKind::inverse);
  CHECK(inv.category == "inverse:major");
  CHECK(inv.source_id == "b");
  CHECK(catalog.find("inverse:s0") == nullptr);
  CHECK(code_of([&] { catalog.at("zzz"); }) == ErrorCode::NotFound);
  CHECK(catalog.categories().count("inverse:area"));

  const auto plain = Catalog::build(store, lex, {0.5, false});
  CHECK(plain.find("inverse:a") == nullptr);
}

TEST_CASE("lexicon json round trip") {
  const std::vector<MetaSymbolDef> defs{def("a", {"x", "y"}), {"b", "Bee", "career", {"a"}, 3}};
  CHECK(io::lexicon_from_json(io::lexicon_to_json(defs)) == defs);
}
