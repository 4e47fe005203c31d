#include <catch2/catch_amalgamated.hpp>

#include <glom/nn.hpp>
#include <glom/rng.hpp>

using namespace glom;
using nn::Ten;

namespace {

// Relative agreement between analytic and central-difference derivatives.
double rel_err(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-6});
}

void fill_random(Ten<double>& t, Rng& rng, double lo = -1.0, double hi = 1.0) {
  for (auto& v : t.data) v = rng.uniform(lo, hi);
}

// Central finite difference of loss() with respect to *p.
template <class Loss>
double central_diff(double* p, const Loss& loss, double eps = 1e-6) {
  const double saved = *p;
  *p = saved + eps;
  const double up = loss();
  *p = saved - eps;
  const double dn = loss();
  *p = saved;
  return (up - dn) / (2.0 * eps);
}

}  // namespace

TEST_CASE("conv2d gradients match finite differences") {
  Rng rng(1001);
  Ten<double> x({2, 6, 7}), w({3, 2 * 9}), b({3});
  fill_random(x, rng);
  fill_random(w, rng);
  fill_random(b, rng);
  Ten<double> proj({3, 6, 7});
  fill_random(proj, rng);

  auto loss = [&] {
    const auto y = nn::conv2d(x, w, b, 3, 1, 1);
    double s = 0.0;
    for (std::size_t i = 0; i < y.data.size(); ++i) s += y.data[i] * proj.data[i];
    return s;
  };

  Ten<double> dw(w.shape), db(b.shape);
  const auto dx = nn::conv2d_backward(proj, x, w, 3, 1, 1, dw, db);

  for (std::size_t i = 0; i < x.data.size(); i += 5)
    CHECK(rel_err(dx.data[i], central_diff(&x.data[i], loss)) < 1e-5);
  for (std::size_t i = 0; i < w.data.size(); i += 3)
    CHECK(rel_err(dw.data[i], central_diff(&w.data[i], loss)) < 1e-5);
  for (std::size_t i = 0; i < b.data.size(); ++i)
    CHECK(rel_err(db.data[i], central_diff(&b.data[i], loss)) < 1e-5);
}

TEST_CASE("maxpool2 gradients match finite differences") {
  Rng rng(1002);
  Ten<double> x({2, 6, 6});
  fill_random(x, rng);
  Ten<double> proj({2, 3, 3});
  fill_random(proj, rng);

  auto loss = [&] {
    std::vector<std::int32_t> argmax;
    const auto y = nn::maxpool2(x, argmax);
    double s = 0.0;
    for (std::size_t i = 0; i < y.data.size(); ++i) s += y.data[i] * proj.data[i];
    return s;
  };
  std::vector<std::int32_t> argmax;
  nn::maxpool2(x, argmax);
  const auto dx = nn::maxpool2_backward(proj, x.shape, argmax);
  for (std::size_t i = 0; i < x.data.size(); ++i)
    CHECK(rel_err(dx.data[i], central_diff(&x.data[i], loss)) < 1e-5);
}

TEST_CASE("linear gradients match finite differences") {
  Rng rng(1003);
  Ten<double> x({4, 5}), w({3, 5}), b({3});
  fill_random(x, rng);
  fill_random(w, rng);
  fill_random(b, rng);
  Ten<double> proj({4, 3});
  fill_random(proj, rng);

  auto loss = [&] {
    const auto y = nn::linear(x, w, b);
    double s = 0.0;
    for (std::size_t i = 0; i < y.data.size(); ++i) s += y.data[i] * proj.data[i];
    return s;
  };
  Ten<double> dw(w.shape), db(b.shape);
  const auto dx = nn::linear_backward(proj, x, w, dw, db);
  for (std::size_t i = 0; i < x.data.size(); ++i)
    CHECK(rel_err(dx.data[i], central_diff(&x.data[i], loss)) < 1e-5);
  for (std::size_t i = 0; i < w.data.size(); ++i)
    CHECK(rel_err(dw.data[i], central_diff(&w.data[i], loss)) < 1e-5);
  for (std::size_t i = 0; i < b.data.size(); ++i)
    CHECK(rel_err(db.data[i], central_diff(&b.data[i], loss)) < 1e-5);
}

TEST_CASE("roi_maxpool gradients match finite differences") {
  Rng rng(1004);
  Ten<double> feat({3, 8, 12});
  fill_random(feat, rng);
  Ten<double> proj({3, 4, 4});
  fill_random(proj, rng);
  const double x0 = 10.0, y0 = 6.0, x1 = 80.0, y1 = 50.0, scale = 1.0 / 8.0;

  auto loss = [&] {
    std::vector<std::int32_t> argmax;
    const auto y = nn::roi_maxpool(feat, x0, y0, x1, y1, scale, 4, argmax);
    double s = 0.0;
    for (std::size_t i = 0; i < y.data.size(); ++i) s += y.data[i] * proj.data[i];
    return s;
  };
  std::vector<std::int32_t> argmax;
  nn::roi_maxpool(feat, x0, y0, x1, y1, scale, 4, argmax);
  Ten<double> dfeat(feat.shape);
  nn::roi_maxpool_backward(proj, argmax, dfeat);
  for (std::size_t i = 0; i < feat.data.size(); i += 3)
    CHECK(rel_err(dfeat.data[i], central_diff(&feat.data[i], loss)) < 1e-5);
}

TEST_CASE("bce_with_logits gradients and values") {
  Rng rng(1005);
  Ten<double> z({6});
  fill_random(z, rng, -3.0, 3.0);
  std::vector<double> targets{0.0, 1.0, 0.25, 0.75, 0.5, 1.0};

  auto loss = [&] { return nn::bce_with_logits(z.ptr(), targets.data(), 6, (double*)nullptr); };
  Ten<double> dz(z.shape);
  nn::bce_with_logits(z.ptr(), targets.data(), std::size_t{6}, dz.ptr());
  for (int i = 0; i < 6; ++i) CHECK(rel_err(dz.data[i], central_diff(&z.data[i], loss)) < 1e-6);

  // Hand value: z = 0, t = 0.5 -> log(2).
  const double z0 = 0.0, t0 = 0.5;
  CHECK(nn::bce_with_logits(&z0, &t0, 1, (double*)nullptr) ==
        Catch::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("softmax_ce gradients, probabilities and stability") {
  Rng rng(1006);
  Ten<double> z({5});
  fill_random(z, rng, -2.0, 2.0);
  const int target = 2;
  auto loss = [&] {
    return nn::softmax_ce(z.ptr(), std::size_t{5}, target, (double*)nullptr, nullptr);
  };
  Ten<double> dz(z.shape);
  std::vector<double> probs(5);
  nn::softmax_ce(z.ptr(), std::size_t{5}, target, dz.ptr(), probs.data());
  double sum = 0.0;
  for (double p : probs) {
    CHECK(p >= 0.0);
    sum += p;
  }
  CHECK(sum == Catch::Approx(1.0).epsilon(1e-12));
  for (int i = 0; i < 5; ++i) CHECK(rel_err(dz.data[i], central_diff(&z.data[i], loss)) < 1e-6);

  // Large logits must not overflow.
  Ten<double> big({3});
  big.data = {1000.0, 999.0, -1000.0};
  std::vector<double> bp(3);
  const double l = nn::softmax_ce(big.ptr(), std::size_t{3}, 0, (double*)nullptr, bp.data());
  CHECK(std::isfinite(l));
  CHECK(bp[0] > 0.7);
}

TEST_CASE("smooth_l1 gradients avoid the kink") {
  Rng rng(1007);
  Ten<double> p({8});
  fill_random(p, rng, -3.0, 3.0);
  std::vector<double> t(8);
  for (auto& v : t) v = rng.uniform(-3.0, 3.0);
  for (int i = 0; i < 8; ++i)
    if (std::abs(p.data[i] - t[i]) > 0.9 && std::abs(p.data[i] - t[i]) < 1.1)
      p.data[i] += 0.3;  // step away from |d| = 1

  auto loss = [&] { return nn::smooth_l1(p.ptr(), t.data(), std::size_t{8}, (double*)nullptr); };
  Ten<double> dp(p.shape);
  nn::smooth_l1(p.ptr(), t.data(), std::size_t{8}, dp.ptr());
  for (int i = 0; i < 8; ++i) CHECK(rel_err(dp.data[i], central_diff(&p.data[i], loss)) < 1e-6);
}

TEST_CASE("sgd_step applies the learning rate and clip_gradients bounds the norm") {
  Ten<float> w({4});
  w.data = {1.f, 2.f, 3.f, 4.f};
  std::vector<nn::ParamRef<float>> params{{"w", &w}};
  nn::GradSet<float> grads(params);
  grads.grads[0].data = {1.f, 1.f, -1.f, 0.f};
  nn::sgd_step(params, grads, 0.5);
  CHECK(w.data[0] == 0.5f);
  CHECK(w.data[2] == 3.5f);
  CHECK(w.data[3] == 4.0f);

  grads.grads[0].data = {3.f, 4.f, 0.f, 0.f};  // norm 5
  const double norm = nn::clip_gradients(grads, 1.0);
  CHECK(norm == Catch::Approx(5.0));
  CHECK(grads.grads[0].data[0] == Catch::Approx(0.6f));
  CHECK(grads.grads[0].data[1] == Catch::Approx(0.8f));
}
