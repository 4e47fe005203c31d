#include <catch2/catch_amalgamated.hpp>

#include <glom/multilabel_eval.hpp>

using namespace glom;

TEST_CASE("multilabel metrics are 1.0 for perfect predictions") {
  const std::vector<LabelSet> sets{
      LabelSet{GlomerulusClass::Normal},
      LabelSet{GlomerulusClass::Sclerosed, GlomerulusClass::ThickGBM},
      LabelSet{GlomerulusClass::Crescent},
  };
  const auto m = multilabel_metrics(sets, sets);
  CHECK(m.accuracy == 1.0);
  CHECK(m.precision == 1.0);
  CHECK(m.recall == 1.0);
}

TEST_CASE("empty predictions score zero across the board") {
  const std::vector<LabelSet> truth{LabelSet{GlomerulusClass::Normal},
                                    LabelSet{GlomerulusClass::Wireloops}};
  const std::vector<LabelSet> pred{LabelSet{}, LabelSet{}};
  const auto m = multilabel_metrics(pred, truth);
  CHECK(m.accuracy == 0.0);
  CHECK(m.precision == 0.0);
  CHECK(m.recall == 0.0);
}

TEST_CASE("hand-computed partial overlap") {
  const std::vector<LabelSet> pred{LabelSet{GlomerulusClass::Normal, GlomerulusClass::ThickGBM}};
  const std::vector<LabelSet> truth{LabelSet{GlomerulusClass::Normal}};
  const auto m = multilabel_metrics(pred, truth);
  CHECK(m.accuracy == 0.5);
  CHECK(m.precision == 0.5);
  CHECK(m.recall == 1.0);
}

TEST_CASE("length mismatch is rejected") {
  CHECK_THROWS_AS(multilabel_metrics({LabelSet{}}, {}), InvalidArgument);
}

TEST_CASE("LabelSet basics") {
  LabelSet s;
  CHECK(s.empty());
  s.insert(GlomerulusClass::SegmentalAdhesion);
  s.insert(GlomerulusClass::Normal);
  CHECK(s.size() == 2);
  CHECK(s.contains(GlomerulusClass::Normal));
  CHECK_FALSE(s.contains(GlomerulusClass::Crescent));
  const auto classes = s.classes();
  REQUIRE(classes.size() == 2);
  CHECK(classes[0] == GlomerulusClass::Normal);
  CHECK(classes[1] == GlomerulusClass::SegmentalAdhesion);

  const auto v = label_vector(s);
  CHECK(v[0] == 1.0);
  CHECK(v[8] == 1.0);
  CHECK(v[4] == 0.0);
  CHECK(binarize(v) == s);
}

TEST_CASE("label aliases resolve spelling variants") {
  const LabelAliasTable table;
  CHECK(table.resolve("Normal") == GlomerulusClass::Normal);
  CHECK(table.resolve("normal") == GlomerulusClass::Normal);
  CHECK(table.resolve("Messangial Hypercellularity") == GlomerulusClass::MesangialHypercellularity);
  CHECK(table.resolve("Mesangial Hypercellularity") == GlomerulusClass::MesangialHypercellularity);
  CHECK(table.resolve("Cresent") == GlomerulusClass::Crescent);
  CHECK(table.resolve("Hyaline Trombi") == GlomerulusClass::HyalineThrombi);
  CHECK(table.resolve("thick_gbm") == GlomerulusClass::ThickGBM);
  CHECK_THROWS_AS(table.resolve("Podocyte"), DataError);
  try {
    table.resolve("Podocyte");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("known aliases") != std::string::npos);
  }
}
