#include <catch2/catch_amalgamated.hpp>

#include <glom/geometry.hpp>
#include <glom/rng.hpp>

using namespace glom;

namespace {

BoundingBox random_box(Rng& rng) {
  const double x = rng.uniform(0.0, 80.0);
  const double y = rng.uniform(0.0, 80.0);
  return {x, y, x + rng.uniform(1.0, 30.0), y + rng.uniform(1.0, 30.0)};
}

std::vector<Detection> random_detections(Rng& rng, int max_n) {
  std::vector<Detection> dets;
  const int n = static_cast<int>(rng.uniform_int(max_n + 1));
  for (int i = 0; i < n; ++i) dets.push_back({random_box(rng), rng.uniform()});
  return dets;
}

}  // namespace

TEST_CASE("iou identity, disjoint and hand-computed overlap") {
  const BoundingBox a{0, 0, 10, 10};
  CHECK(iou(a, a) == 1.0);
  CHECK(iou(a, {20, 20, 30, 30}) == 0.0);
  CHECK(iou(a, {5, 0, 15, 10}) == Catch::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("iou rejects degenerate boxes") {
  CHECK_THROWS_AS(iou({0, 0, 0, 10}, {0, 0, 10, 10}), InvalidArgument);
  CHECK_THROWS_AS(iou({0, 0, 10, 10}, {5, 5, 5, 5}), InvalidArgument);
}

TEST_CASE("iou symmetry and bounds on random boxes") {
  Rng rng(101);
  for (int i = 0; i < 1000; ++i) {
    const auto a = random_box(rng);
    const auto b = random_box(rng);
    const double ab = iou(a, b);
    CHECK(ab == iou(b, a));
    CHECK(ab >= 0.0);
    CHECK(ab <= 1.0);
  }
  // 1 iff identical
  const auto a = random_box(rng);
  CHECK(iou(a, a) == 1.0);
  BoundingBox shifted = a;
  shifted.x_min += 0.5;
  CHECK(iou(a, shifted) < 1.0);
}

TEST_CASE("nms keeps a singleton") {
  const std::vector<Detection> d{{{0, 0, 10, 10}, 0.7}};
  const auto kept = nms(d, 0.5);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].score == 0.7);
}

TEST_CASE("nms suppresses the lower-scored duplicate") {
  const std::vector<Detection> d{{{0, 0, 10, 10}, 0.9}, {{0, 0, 10, 10}, 0.8}};
  const auto kept = nms(d, 0.5);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].score == 0.9);
}

TEST_CASE("nms greedy chain revives the third box") {
  // A suppresses B; C overlaps only B, so once B is gone C survives.
  // (With axis-aligned boxes a chain with both overlaps above 0.5 and
  // IoU(A,C) = 0 cannot exist, so the trace uses threshold 0.2.)
  const Detection a{{0, 0, 10, 10}, 0.9};
  const Detection b{{2.5, 0, 12.5, 10}, 0.8};   // IoU(a,b) = 0.6
  const Detection c{{10, 0, 12.5, 10}, 0.7};    // IoU(b,c) = 0.25, IoU(a,c) = 0
  CHECK(iou(a.box, b.box) == Catch::Approx(0.6));
  CHECK(iou(b.box, c.box) == Catch::Approx(0.25));
  CHECK(iou(a.box, c.box) == 0.0);
  const auto kept = nms({a, b, c}, 0.2);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].score == 0.9);
  CHECK(kept[1].score == 0.7);
}

TEST_CASE("nms handles empty input") {
  CHECK(nms({}, 0.5).empty());
}

TEST_CASE("nms idempotence and threshold monotonicity") {
  Rng rng(202);
  for (int i = 0; i < 1000; ++i) {
    const auto dets = random_detections(rng, 8);
    const double t1 = rng.uniform();
    const double t2 = rng.uniform(t1, 1.0);
    const auto once = nms(dets, t1);
    const auto twice = nms(once, t1);
    REQUIRE(once.size() == twice.size());
    for (std::size_t k = 0; k < once.size(); ++k) {
      CHECK(once[k].box == twice[k].box);
      CHECK(once[k].score == twice[k].score);
    }
    CHECK(nms(dets, t1).size() <= nms(dets, t2).size());
  }
}

TEST_CASE("match_detections trivial cases") {
  const BoundingBox truth{0, 0, 10, 10};

  SECTION("exact prediction is a TP") {
    const auto m = match_detections({{truth, 0.9}}, {truth}, 0.5);
    CHECK(m.tp() == 1);
    CHECK(m.unmatched_preds.empty());
    CHECK(m.unmatched_truths.empty());
  }
  SECTION("no predictions leaves all truths unmatched") {
    const auto m = match_detections({}, {truth, {20, 20, 30, 30}}, 0.5);
    CHECK(m.tp() == 0);
    CHECK(m.unmatched_truths.size() == 2);
  }
  SECTION("two predictions on one truth: higher score wins") {
    const std::vector<Detection> preds{{{2.5, 0, 12.5, 10}, 0.8}, {truth, 0.9}};
    const auto m = match_detections(preds, {truth}, 0.5);
    REQUIRE(m.tp() == 1);
    CHECK(m.matches[0].first == 1);  // the exact, higher-scored prediction
    REQUIRE(m.unmatched_preds.size() == 1);
    CHECK(m.unmatched_preds[0] == 0);
  }
}

TEST_CASE("match_detections counting identities hold on random inputs") {
  Rng rng(303);
  for (int i = 0; i < 500; ++i) {
    const auto preds = random_detections(rng, 6);
    std::vector<BoundingBox> truths;
    const int nt = static_cast<int>(rng.uniform_int(5));
    for (int t = 0; t < nt; ++t) truths.push_back(random_box(rng));
    const auto m = match_detections(preds, truths, rng.uniform());
    CHECK(m.tp() + m.unmatched_truths.size() == truths.size());
    CHECK(m.tp() + m.unmatched_preds.size() == preds.size());
  }
}

TEST_CASE("match_detections equal-IoU tie breaks to the lower truth index") {
  // Two identical truths; the prediction overlaps both equally.
  const std::vector<BoundingBox> truths{{0, 0, 10, 10}, {0, 0, 10, 10}};
  const auto m = match_detections({{{0, 0, 10, 10}, 0.9}}, truths, 0.5);
  REQUIRE(m.tp() == 1);
  CHECK(m.matches[0].second == 0);
}
