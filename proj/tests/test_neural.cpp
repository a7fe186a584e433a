#include "doctest.h"

#include <cmath>
#include <cstring>
#include <filesystem>

#include "aogplan/nn/checkpoint.hpp"
#include "aogplan/nn/ops.hpp"
#include "aogplan/nn/optim.hpp"
#include "aogplan/nn/recurrent.hpp"
#include "gradcheck.hpp"
#include "test_support.hpp"

using namespace aogplan;
using namespace aogplan::nn;
using aogplan::test::finite_difference_check;

namespace {

// Independent LSTM reference, written gate by gate against the cell
// definition rather than through the layer kernels.
void reference_lstm(const LstmCellParams& p, const std::vector<double>& x,
                    const std::vector<double>& h_prev,
                    const std::vector<double>& c_prev, std::vector<double>& h,
                    std::vector<double>& c) {
  const size_t H = p.hidden_dim();
  const size_t D = p.input_dim();
  auto gate_pre = [&](size_t gate, size_t k) {
    double s = p.b.v[gate * H + k];
    for (size_t j = 0; j < D; ++j) s += p.Wx.at(gate * H + k, j) * x[j];
    for (size_t j = 0; j < H; ++j) s += p.Wh.at(gate * H + k, j) * h_prev[j];
    return s;
  };
  auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  h.resize(H);
  c.resize(H);
  for (size_t k = 0; k < H; ++k) {
    const double i = sig(gate_pre(0, k));
    const double f = sig(gate_pre(1, k));
    const double g = std::tanh(gate_pre(2, k));
    const double o = sig(gate_pre(3, k));
    c[k] = f * c_prev[k] + i * g;
    h[k] = o * std::tanh(c[k]);
  }
}

}  // namespace

TEST_CASE("softmax, relu and cross-entropy basics") {
  std::vector<double> p(3);
  softmax(std::vector<double>{0, 0, 0}, p);
  for (double q : p) CHECK(q == doctest::Approx(1.0 / 3));

  std::vector<double> y(2);
  relu(std::vector<double>{-1, 2}, y);
  CHECK(y == std::vector<double>{0, 2});

  std::vector<double> p2(2);
  softmax(std::vector<double>{0, 0}, p2);
  CHECK(cross_entropy(p2, 0) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("softmax sums to one and stays strictly positive") {
  Rng rng(7);
  for (int iter = 0; iter < 200; ++iter) {
    const size_t n = 2 + rng.uniform_int(14);
    std::vector<double> logits(n), p(n);
    for (double& v : logits) v = rng.uniform(-40, 40);
    softmax(logits, p);
    double sum = 0;
    for (double q : p) {
      CHECK(q > 0.0);
      sum += q;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("masked softmax zeroes invalid branches") {
  std::vector<double> p(3);
  masked_softmax(std::vector<double>{5, 1, 100}, 2, p);
  CHECK(p[2] == 0.0);
  CHECK(p[0] + p[1] == doctest::Approx(1.0));
}

TEST_CASE("cross-entropy gradient is p minus one-hot") {
  std::vector<double> logits{0.3, -1.2, 2.0};
  std::vector<double> p(3), d(3, 0.0);
  softmax(logits, p);
  softmax_xent_backward(p, 1, 3, d);
  CHECK(d[0] == doctest::Approx(p[0]));
  CHECK(d[1] == doctest::Approx(p[1] - 1.0));
  CHECK(d[2] == doctest::Approx(p[2]));
}

TEST_CASE("lstm_step: zero parameters halve the carried cell") {
  LstmCellParams params;
  params.resize(3, 4);
  std::vector<double> x(3, 0.0), h0(4, 0.0), c0{0.4, -1.0, 2.0, 0.0};
  LstmStepCache cache;
  lstm_step(params, x, h0, c0, cache);
  for (size_t k = 0; k < 4; ++k) {
    CHECK(cache.c[k] == doctest::Approx(0.5 * c0[k]));
    CHECK(cache.h[k] == doctest::Approx(0.5 * std::tanh(0.5 * c0[k])));
  }

  std::vector<double> zc(4, 0.0);
  lstm_step(params, x, h0, zc, cache);
  for (size_t k = 0; k < 4; ++k) {
    CHECK(cache.h[k] == 0.0);
    CHECK(cache.c[k] == 0.0);
  }
}

TEST_CASE("lstm_step matches the gate-by-gate reference on random cases") {
  Rng rng(13);
  for (int iter = 0; iter < 100; ++iter) {
    const size_t d = 1 + rng.uniform_int(6);
    const size_t h = 1 + rng.uniform_int(6);
    LstmCellParams params;
    params.resize(d, h);
    for (double& v : params.Wx.v) v = rng.uniform(-1, 1);
    for (double& v : params.Wh.v) v = rng.uniform(-1, 1);
    for (double& v : params.b.v) v = rng.uniform(-1, 1);
    std::vector<double> x(d), h0(h), c0(h);
    for (double& v : x) v = rng.uniform(-2, 2);
    for (double& v : h0) v = rng.uniform(-2, 2);
    for (double& v : c0) v = rng.uniform(-2, 2);

    LstmStepCache cache;
    lstm_step(params, x, h0, c0, cache);
    std::vector<double> rh, rc;
    reference_lstm(params, x, h0, c0, rh, rc);
    for (size_t k = 0; k < h; ++k) {
      CHECK(cache.h[k] == doctest::Approx(rh[k]).epsilon(1e-12));
      CHECK(cache.c[k] == doctest::Approx(rc[k]).epsilon(1e-12));
    }
  }
}

TEST_CASE("gradcheck: 2-step unrolled lstm + softmax toy network") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(100 + seed);
    const size_t d = 3, h = 4, classes = 3;
    LstmCellParams cell;
    cell.resize(d, h);
    Tensor W_out({classes, h}), b_out({classes});
    init_uniform_fan(rng, cell.Wx, d, h);
    init_uniform_fan(rng, cell.Wh, h, h);
    init_uniform_fan(rng, cell.b, 1, 1);
    init_uniform_fan(rng, W_out, h, classes);
    init_uniform_fan(rng, b_out, 1, 1);

    std::vector<std::vector<double>> xs = {{0.3, -1.0, 0.4}, {1.2, 0.1, -0.7}};
    const int targets[2] = {2, 0};

    std::vector<ParamRef> params = {{"Wx", &cell.Wx}, {"Wh", &cell.Wh},
                                    {"b", &cell.b},   {"W_out", &W_out},
                                    {"b_out", &b_out}};
    auto loss_fn = [&]() {
      std::vector<double> hcur(h, 0.0), ccur(h, 0.0);
      double loss = 0;
      LstmStepCache cache;
      for (int t = 0; t < 2; ++t) {
        lstm_step(cell, xs[static_cast<size_t>(t)], hcur, ccur, cache);
        hcur = cache.h;
        ccur = cache.c;
        std::vector<double> logits(classes), p(classes);
        linear(W_out, hcur, b_out, logits);
        softmax(logits, p);
        loss += cross_entropy(p, targets[t]);
      }
      return loss;
    };

    // Analytic pass with caches kept for BPTT.
    LstmCellParams gcell;
    gcell.resize(d, h);
    Tensor gW_out({classes, h}), gb_out({classes});
    std::vector<ParamRef> grads = {{"Wx", &gcell.Wx}, {"Wh", &gcell.Wh},
                                   {"b", &gcell.b},   {"W_out", &gW_out},
                                   {"b_out", &gb_out}};
    {
      std::vector<LstmStepCache> caches(2);
      std::vector<std::vector<double>> ps(2);
      std::vector<double> hcur(h, 0.0), ccur(h, 0.0);
      for (int t = 0; t < 2; ++t) {
        lstm_step(cell, xs[static_cast<size_t>(t)], hcur, ccur,
                  caches[static_cast<size_t>(t)]);
        hcur = caches[static_cast<size_t>(t)].h;
        ccur = caches[static_cast<size_t>(t)].c;
        std::vector<double> logits(classes);
        linear(W_out, hcur, b_out, logits);
        ps[static_cast<size_t>(t)].resize(classes);
        softmax(logits, ps[static_cast<size_t>(t)]);
      }
      std::vector<double> dh(h, 0.0), dc(h, 0.0), dx(d), dhp(h), dcp(h);
      for (int t = 1; t >= 0; --t) {
        std::vector<double> dlogits(classes, 0.0);
        softmax_xent_backward(ps[static_cast<size_t>(t)], targets[t],
                              static_cast<int>(classes), dlogits);
        linear_backward(W_out, caches[static_cast<size_t>(t)].h, dlogits,
                        gW_out, &gb_out, dh);
        lstm_step_backward(cell, caches[static_cast<size_t>(t)], dh, dc, gcell,
                           dx, dhp, dcp);
        dh = dhp;
        dc = dcp;
      }
    }

    const auto result = finite_difference_check(loss_fn, params, grads, 1e-5);
    INFO("seed ", seed, " worst ", result.worst_param);
    CHECK(result.max_rel_error < 1e-4);
  }
}

TEST_CASE("sgd follows the momentum + weight-decay update rule") {
  Tensor w({1}), g({1});
  std::vector<ParamRef> ws = {{"w", &w}}, gs = {{"g", &g}};

  SUBCASE("plain step") {
    w.v[0] = 1.0;
    g.v[0] = 1.0;
    SgdConfig cfg{0.1, 0.0, 0.0, 1};
    SgdState sgd(ws);
    sgd.step(ws, gs, cfg);
    CHECK(w.v[0] == doctest::Approx(0.9));
  }
  SUBCASE("momentum accumulates across steps") {
    w.v[0] = 1.0;
    g.v[0] = 1.0;
    SgdConfig cfg{0.1, 0.9, 0.0, 1};
    SgdState sgd(ws);
    sgd.step(ws, gs, cfg);
    CHECK(w.v[0] == doctest::Approx(0.9));
    sgd.step(ws, gs, cfg);  // v = 0.9*(-0.1) - 0.1 = -0.19
    CHECK(w.v[0] == doctest::Approx(0.71));
  }
  SUBCASE("weight decay alone") {
    w.v[0] = 1.0;
    g.v[0] = 0.0;
    SgdConfig cfg{0.1, 0.0, 0.0005, 1};
    SgdState sgd(ws);
    sgd.step(ws, gs, cfg);
    CHECK(w.v[0] == doctest::Approx(0.99995));
  }
}

TEST_CASE("fan-based init: deterministic, centered, bounded") {
  Tensor a({40, 60}), b({40, 60});
  Rng r1(5), r2(5);
  init_uniform_fan(r1, a, 60, 40);
  init_uniform_fan(r2, b, 60, 40);
  CHECK(a.v == b.v);

  Tensor big({100, 1000});
  Rng r3(6);
  init_uniform_fan(r3, big, 1000, 100);
  const double bound = std::sqrt(6.0 / 1100.0);
  double sum = 0;
  for (double v : big.v) {
    CHECK(std::abs(v) <= bound);
    sum += v;
  }
  const double mean = sum / static_cast<double>(big.numel());
  const double se = bound / std::sqrt(3.0) / std::sqrt(static_cast<double>(big.numel()));
  CHECK(std::abs(mean) < 3 * se);
}

TEST_CASE("loss decreases by 90% on a tiny regression task") {
  // One linear layer fit to a realizable linear mapping under squared error.
  Rng rng(17);
  const size_t in = 4, out = 3, n = 16;
  Tensor W_true({out, in}), b_true({out});
  for (double& v : W_true.v) v = rng.uniform(-1, 1);
  for (double& v : b_true.v) v = rng.uniform(-1, 1);
  std::vector<std::vector<double>> xs(n, std::vector<double>(in));
  std::vector<std::vector<double>> ts(n, std::vector<double>(out));
  for (size_t i = 0; i < n; ++i) {
    for (double& v : xs[i]) v = rng.uniform(-1, 1);
    ts[i].resize(out);
    linear(W_true, xs[i], b_true, ts[i]);
  }

  Tensor W({out, in}), b({out});
  init_uniform_fan(rng, W, in, out);
  Tensor gW({out, in}), gb({out});
  std::vector<ParamRef> params = {{"W", &W}, {"b", &b}};
  std::vector<ParamRef> grads = {{"gW", &gW}, {"gb", &gb}};
  SgdConfig cfg{0.1, 0.9, 0.0, 1};
  SgdState sgd(params);

  auto pass = [&](bool with_grads) {
    double loss = 0;
    for (size_t i = 0; i < n; ++i) {
      std::vector<double> y(out);
      linear(W, xs[i], b, y);
      std::vector<double> dy(out);
      for (size_t k = 0; k < out; ++k) {
        const double err = y[k] - ts[i][k];
        loss += err * err;
        dy[k] = 2.0 * err / static_cast<double>(n);
      }
      if (with_grads) linear_backward(W, xs[i], dy, gW, &gb, {});
    }
    return loss / static_cast<double>(n);
  };

  const double initial = pass(false);
  for (int step = 0; step < 200; ++step) {
    zero_grads(grads);
    pass(true);
    sgd.step(params, grads, cfg);
  }
  const double final_loss = pass(false);
  CHECK(final_loss <= 0.1 * initial);
}

TEST_CASE("checkpoints round-trip bit-exactly") {
  Rng rng(23);
  Tensor a({7, 5}), b({13});
  for (double& v : a.v) v = rng.uniform(-10, 10);
  for (double& v : b.v) v = rng.normal();
  b.v[0] = 0.1 + 0.2;  // classic non-representable sum
  std::vector<ParamRef> params = {{"a", &a}, {"b", &b}};

  const auto path = std::filesystem::temp_directory_path() / "aogplan_ckpt_test.bin";
  save_checkpoint(path, params, R"({"model":"test"})");

  Tensor a2({7, 5}), b2({13});
  std::vector<ParamRef> loaded = {{"a", &a2}, {"b", &b2}};
  const std::string meta = load_checkpoint(path, loaded);
  CHECK(meta == R"({"model":"test"})");
  CHECK(std::memcmp(a.v.data(), a2.v.data(), a.numel() * sizeof(double)) == 0);
  CHECK(std::memcmp(b.v.data(), b2.v.data(), b.numel() * sizeof(double)) == 0);

  Tensor wrong({5, 7});
  std::vector<ParamRef> bad = {{"a", &wrong}, {"b", &b2}};
  CHECK_THROWS_AS(load_checkpoint(path, bad), CheckpointError);
  std::filesystem::remove(path);
}

TEST_CASE("linear rejects mismatched shapes") {
  Tensor W({3, 4});
  std::vector<double> x(5), y(3);
  CHECK_THROWS_AS(linear(W, x, y), std::invalid_argument);
}
