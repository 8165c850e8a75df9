// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <cstring>
#include <vector>

#include "doctest.h"
#include "flespeech/common/error.h"
#include "flespeech/nn/ops.h"
#include "flespeech/nn/optim.h"
#include "flespeech/nn/params.h"
#include "flespeech/nn/serialize.h"
#include "test_util.h"

using namespace flespeech;
using nn::Tensor;
using nn::Var;

namespace {

Tensor random_tensor(std::vector<int> shape, Rng& rng, double lo = -1.0,
                     double hi = 1.0) {
  Tensor t = Tensor::zeros(std::move(shape));
  for (auto& v : t.vec()) v = rng.uniform(lo, hi);
  return t;
}

// Runs a finite-difference check of `build` (scalar output) against the
// autograd gradients of every parameter in the store.
void expect_gradients_match(nn::ParamStore& ps,
                            const std::function<Var()>& build,
                            std::uint64_t seed, double tol = 1e-6) {
  Rng rng(seed);
  const auto report =
      testing::check_gradients(ps, ps.names(), build, 4, rng);
  CAPTURE(report.worst_param);
  CHECK(report.checked > 0);
  CHECK(report.max_rel_err < tol);
}

}  // namespace

TEST_SUITE("nn") {

TEST_CASE("elementwise forward values match the scalar math") {
  Rng rng(11);
  const Tensor a = random_tensor({2, 3}, rng);
  const Tensor b = random_tensor({2, 3}, rng);
  const Var va = Var::constant(a);
  const Var vb = Var::constant(b);

  const Tensor sum = nn::add(va, vb).value();
  const Tensor diff = nn::sub(va, vb).value();
  const Tensor prod = nn::mul(va, vb).value();
  const Tensor scaled = nn::scale(va, -2.5).value();
  const Tensor shifted = nn::add_scalar(va, 0.75).value();
  for (int i = 0; i < 6; ++i) {
    CHECK(sum.vec()[i] == doctest::Approx(a.vec()[i] + b.vec()[i]));
    CHECK(diff.vec()[i] == doctest::Approx(a.vec()[i] - b.vec()[i]));
    CHECK(prod.vec()[i] == doctest::Approx(a.vec()[i] * b.vec()[i]));
    CHECK(scaled.vec()[i] == doctest::Approx(-2.5 * a.vec()[i]));
    CHECK(shifted.vec()[i] == doctest::Approx(a.vec()[i] + 0.75));
  }

  const Tensor t = nn::tanh_op(va).value();
  const Tensor s = nn::sigmoid(va).value();
  const Tensor e = nn::exp_op(va).value();
  const Tensor sq = nn::square(va).value();
  const Tensor ab = nn::abs_op(va).value();
  const Tensor r = nn::relu(va).value();
  for (int i = 0; i < 6; ++i) {
    const double x = a.vec()[i];
    CHECK(t.vec()[i] == doctest::Approx(std::tanh(x)));
    CHECK(s.vec()[i] == doctest::Approx(1.0 / (1.0 + std::exp(-x))));
    CHECK(e.vec()[i] == doctest::Approx(std::exp(x)));
    CHECK(sq.vec()[i] == doctest::Approx(x * x));
    CHECK(ab.vec()[i] == doctest::Approx(std::abs(x)));
    CHECK(r.vec()[i] == doctest::Approx(x > 0.0 ? x : 0.0));
  }

  const Tensor pos = random_tensor({2, 2}, rng, 0.2, 3.0);
  const Tensor lg = nn::log_op(Var::constant(pos)).value();
  for (int i = 0; i < 4; ++i) {
    CHECK(lg.vec()[i] == doctest::Approx(std::log(pos.vec()[i])));
  }
}

TEST_CASE("matmul and transpose match a hand-rolled triple loop") {
  Rng rng(12);
  const Tensor a = random_tensor({3, 4}, rng);
  const Tensor b = random_tensor({4, 2}, rng);
  const Tensor c = nn::matmul(Var::constant(a), Var::constant(b)).value();
  REQUIRE(c.rows() == 3);
  REQUIRE(c.cols() == 2);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 2; ++j) {
      double want = 0.0;
      for (int k = 0; k < 4; ++k) want += a.at(i, k) * b.at(k, j);
      CHECK(c.at(i, j) == doctest::Approx(want).epsilon(1e-12));
    }
  }

  const Tensor at = nn::transpose(Var::constant(a)).value();
  REQUIRE(at.rows() == 4);
  REQUIRE(at.cols() == 3);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 4; ++j) CHECK(at.at(j, i) == a.at(i, j));
  }
}

TEST_CASE("softmax rows are normalized and shift invariant") {
  Rng rng(13);
  const Tensor a = random_tensor({4, 5}, rng, -3.0, 3.0);
  Tensor shifted = a;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 5; ++j) shifted.at(i, j) += 7.0;
  }
  const Tensor p = nn::softmax_rows(Var::constant(a)).value();
  const Tensor q = nn::softmax_rows(Var::constant(shifted)).value();
  for (int i = 0; i < 4; ++i) {
    double row = 0.0;
    for (int j = 0; j < 5; ++j) {
      CHECK(p.at(i, j) > 0.0);
      row += p.at(i, j);
      CHECK(p.at(i, j) == doctest::Approx(q.at(i, j)).epsilon(1e-12));
    }
    CHECK(row == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("layer_norm_rows produces zero-mean unit-variance rows") {
  Rng rng(14);
  const Tensor a = random_tensor({3, 8}, rng, -2.0, 2.0);
  const Var gain = Var::constant(Tensor::full({8}, 1.0));
  const Var bias = Var::constant(Tensor::zeros({8}));
  const Tensor y =
      nn::layer_norm_rows(Var::constant(a), gain, bias, 0.0).value();
  for (int i = 0; i < 3; ++i) {
    double mean = 0.0, var = 0.0;
    for (int j = 0; j < 8; ++j) mean += y.at(i, j);
    mean /= 8.0;
    for (int j = 0; j < 8; ++j) var += (y.at(i, j) - mean) * (y.at(i, j) - mean);
    var /= 8.0;
    CHECK(std::abs(mean) < 1e-12);
    CHECK(var == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("frame_signal lays out hops and zero-pads the tail") {
  const Tensor x = Tensor::from_vector({6}, {1, 2, 3, 4, 5, 6});
  const Tensor f = nn::frame_signal(Var::constant(x), 4, 2, 3).value();
  REQUIRE(f.rows() == 3);
  REQUIRE(f.cols() == 4);
  const std::vector<double> want = {1, 2, 3, 4, 3, 4, 5, 6, 5, 6, 0, 0};
  for (int i = 0; i < 12; ++i) CHECK(f.vec()[i] == want[(std::size_t)i]);
}

TEST_CASE("cross_entropy_mean matches log-softmax by hand and skips weight-0 rows") {
  Rng rng(15);
  const Tensor logits = random_tensor({3, 4}, rng, -2.0, 2.0);
  const std::vector<int> targets = {2, 0, 3};

  auto row_nll = [&](int r) {
    double mx = logits.at(r, 0);
    for (int j = 1; j < 4; ++j) mx = std::max(mx, logits.at(r, j));
    double z = 0.0;
    for (int j = 0; j < 4; ++j) z += std::exp(logits.at(r, j) - mx);
    return -(logits.at(r, targets[(std::size_t)r]) - mx - std::log(z));
  };

  const double all =
      nn::cross_entropy_mean(Var::constant(logits), targets).value().at(0);
  CHECK(all ==
        doctest::Approx((row_nll(0) + row_nll(1) + row_nll(2)) / 3.0)
            .epsilon(1e-12));

  const double masked = nn::cross_entropy_mean(Var::constant(logits), targets,
                                               {1.0, 0.0, 1.0})
                            .value()
                            .at(0);
  CHECK(masked ==
        doctest::Approx((row_nll(0) + row_nll(2)) / 2.0).epsilon(1e-12));
}

TEST_CASE("finite differences confirm gradients for every op") {
  // Inputs are kept away from relu/abs kinks and l1 ties so the numeric
  // derivative is well defined at the sampled points.
  Rng init(21);

  SUBCASE("arithmetic and activations") {
    nn::ParamStore ps;
    ps.create_gaussian("a", {3, 4}, init, 0.7);
    ps.create_gaussian("b", {3, 4}, init, 0.7);
    for (auto& v : ps.value("a").vec()) v += (v >= 0 ? 0.3 : -0.3);
    expect_gradients_match(ps, [&] {
      const Var a = nn::use_param(ps, "a");
      const Var b = nn::use_param(ps, "b");
      Var y = nn::add(nn::mul(a, b), nn::sub(a, nn::scale(b, 0.5)));
      y = nn::add(y, nn::add_scalar(nn::relu(a), 0.1));
      y = nn::add(y, nn::gelu(b));
      y = nn::add(y, nn::tanh_op(a));
      y = nn::add(y, nn::sigmoid(b));
      y = nn::add(y, nn::abs_op(a));
      return nn::sum_all(y);
    }, 101, 1e-5);
  }

  SUBCASE("exp log square") {
    nn::ParamStore ps;
    Rng r2(22);
    ps.create("p", {2, 3});
    for (auto& v : ps.value("p").vec()) v = r2.uniform(0.4, 1.6);
    expect_gradients_match(ps, [&] {
      const Var p = nn::use_param(ps, "p");
      return nn::sum_all(
          nn::add(nn::exp_op(nn::scale(p, 0.5)),
                  nn::add(nn::log_op(p), nn::square(p))));
    }, 102);
  }

  SUBCASE("matmul transpose add_rowvec tile_rows") {
    nn::ParamStore ps;
    Rng r2(23);
    ps.create_gaussian("w", {4, 3}, r2, 0.5);
    ps.create_gaussian("x", {2, 4}, r2, 0.5);
    ps.create_gaussian("v", {3}, r2, 0.5);
    ps.create_gaussian("row", {1, 3}, r2, 0.5);
    expect_gradients_match(ps, [&] {
      const Var h = nn::add_rowvec(
          nn::matmul(nn::use_param(ps, "x"), nn::use_param(ps, "w")),
          nn::use_param(ps, "v"));
      const Var t = nn::transpose(h);
      const Var tiled = nn::tile_rows(nn::use_param(ps, "row"), 2);
      return nn::add(nn::sum_all(nn::square(t)),
                     nn::mse_loss(h, tiled));
    }, 103);
  }

  SUBCASE("gather_rows accumulates over repeated ids") {
    nn::ParamStore ps;
    Rng r2(24);
    ps.create_gaussian("table", {5, 3}, r2, 0.8);
    expect_gradients_match(ps, [&] {
      const Var g =
          nn::gather_rows(nn::use_param(ps, "table"), {1, 4, 1, 0, 1});
      return nn::sum_all(nn::square(g));
    }, 104);
  }

  SUBCASE("concat slice reshape frame_signal") {
    nn::ParamStore ps;
    Rng r2(25);
    ps.create_gaussian("a", {2, 3}, r2, 0.6);
    ps.create_gaussian("b", {2, 2}, r2, 0.6);
    ps.create_gaussian("sig", {9}, r2, 0.6);
    expect_gradients_match(ps, [&] {
      const Var a = nn::use_param(ps, "a");
      const Var b = nn::use_param(ps, "b");
      const Var cc = nn::concat_cols({a, b});           // [2,5]
      const Var cr = nn::concat_rows({a, a});           // [4,3]
      const Var sc = nn::slice_cols(cc, 1, 4);          // [2,3]
      const Var sr = nn::slice_rows(cr, 1, 3);          // [2,3]
      const Var rs = nn::reshape(sc, {3, 2});
      const Var fr = nn::frame_signal(nn::use_param(ps, "sig"), 4, 3, 3);
      return nn::add(nn::sum_all(nn::square(rs)),
                     nn::add(nn::sum_all(nn::square(sr)),
                             nn::sum_all(nn::square(fr))));
    }, 105);
  }

  SUBCASE("softmax layer_norm and the reductions") {
    nn::ParamStore ps;
    Rng r2(26);
    ps.create_gaussian("z", {3, 5}, r2, 0.9);
    ps.create_gaussian("g", {5}, r2, 0.3);
    ps.create_gaussian("c", {5}, r2, 0.3);
    for (auto& v : ps.value("g").vec()) v += 1.0;
    expect_gradients_match(ps, [&] {
      const Var z = nn::use_param(ps, "z");
      const Var n = nn::layer_norm_rows(z, nn::use_param(ps, "g"),
                                        nn::use_param(ps, "c"));
      const Var p = nn::softmax_rows(z);
      const Var m = nn::mean_rows(n);  // [1,5]
      return nn::add(nn::mean_all(nn::square(p)),
                     nn::add(nn::sum_all(nn::square(m)),
                             nn::mean_all(nn::exp_op(n))));
    }, 106, 1e-5);
  }

  SUBCASE("losses") {
    nn::ParamStore ps;
    Rng r2(27);
    ps.create_gaussian("pred", {3, 4}, r2, 1.0);
    ps.create_gaussian("logits", {4, 6}, r2, 1.0);
    expect_gradients_match(ps, [&] {
      const Var pred = nn::use_param(ps, "pred");
      const Var tgt = Var::constant(Tensor::full({3, 4}, 0.25));
      const Var ce = nn::cross_entropy_mean(nn::use_param(ps, "logits"),
                                            {1, 3, 0, 5}, {1.0, 0.0, 2.0, 1.0});
      return nn::add(nn::mse_loss(pred, tgt),
                     nn::add(nn::l1_loss(pred, tgt), ce));
    }, 107, 1e-5);
  }
}

TEST_CASE("use_frozen blocks gradient flow into the store") {
  Rng rng(31);
  nn::ParamStore ps;
  ps.create_gaussian("w", {2, 2}, rng, 1.0);
  ps.zero_grads();

  nn::backward(nn::sum_all(nn::square(nn::use_frozen(ps, "w"))));
  for (double g : ps.grad("w").vec()) CHECK(g == 0.0);

  nn::backward(nn::sum_all(nn::use_param(ps, "w")));
  for (double g : ps.grad("w").vec()) CHECK(g == 1.0);

  // A second backward pass accumulates instead of overwriting.
  nn::backward(nn::sum_all(nn::use_param(ps, "w")));
  for (double g : ps.grad("w").vec()) CHECK(g == 2.0);
}

TEST_CASE("gradient flows through a frozen constant to upstream inputs") {
  nn::ParamStore ps;
  Rng rng(32);
  ps.create_gaussian("x", {2, 3}, rng, 1.0);
  ps.create_gaussian("w", {3, 2}, rng, 1.0);
  ps.zero_grads();
  nn::backward(nn::sum_all(
      nn::matmul(nn::use_param(ps, "x"), nn::use_frozen(ps, "w"))));
  bool any_x = false;
  for (double g : ps.grad("x").vec()) any_x = any_x || g != 0.0;
  CHECK(any_x);
  for (double g : ps.grad("w").vec()) CHECK(g == 0.0);
}

TEST_CASE("ParamStore iterates in name order and hashes content") {
  nn::ParamStore ps;
  Rng rng(33);
  ps.create_gaussian("m.z", {2}, rng, 1.0);
  ps.create_gaussian("a.q", {3}, rng, 1.0);
  ps.create_gaussian("m.a", {2, 2}, rng, 1.0);
  const auto names = ps.names();
  REQUIRE(names.size() == 3);
  CHECK(names[0] == "a.q");
  CHECK(names[1] == "m.a");
  CHECK(names[2] == "m.z");
  CHECK(ps.names_with_prefix("m.") == std::vector<std::string>{"m.a", "m.z"});
  CHECK(ps.parameter_count() == 2 + 3 + 4);

  const std::uint64_t h0 = ps.content_hash();
  const std::uint64_t hm = ps.content_hash_prefix("m.");
  CHECK(h0 == ps.content_hash());  // deterministic
  ps.value("a.q").vec()[0] += 1.0;
  CHECK(ps.content_hash() != h0);
  // The change was outside the "m." prefix.
  CHECK(ps.content_hash_prefix("m.") == hm);
  ps.value("m.z").vec()[1] += 1.0;
  CHECK(ps.content_hash_prefix("m.") != hm);
}

TEST_CASE("ParamStore save/load round-trips exact bits") {
  testing::TempDir tmp("nn_params");
  nn::ParamStore ps;
  Rng rng(34);
  ps.create_gaussian("enc.w", {3, 5}, rng, 2.0);
  ps.create_full("enc.b", {5}, -0.125);
  ps.create("tiny", {1});
  ps.value("tiny").vec()[0] = 1e-300;

  const std::string path = tmp.file("params.fls");
  ps.save(path);
  nn::ParamStore loaded;
  loaded.load(path);
  REQUIRE(loaded.names() == ps.names());
  for (const auto& name : ps.names()) {
    const auto& a = ps.value(name).vec();
    const auto& b = loaded.value(name).vec();
    REQUIRE(a.size() == b.size());
    CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
    CHECK(loaded.value(name).shape() == ps.value(name).shape());
  }
  CHECK(loaded.content_hash() == ps.content_hash());
}

TEST_CASE("tensor map serialization round-trips and rejects missing files") {
  testing::TempDir tmp("nn_ser");
  std::map<std::string, Tensor> m;
  Rng rng(35);
  m["alpha"] = random_tensor({4, 2}, rng, -5.0, 5.0);
  m["beta"] = Tensor::from_vector({3}, {0.0, -0.0, 1e-17});
  const std::string path = tmp.file("map.fls");
  nn::save_tensor_map(path, m);
  const auto back = nn::load_tensor_map(path);
  REQUIRE(back.size() == 2);
  for (const auto& [name, t] : m) {
    REQUIRE(back.count(name) == 1);
    const auto& u = back.at(name);
    REQUIRE(u.shape() == t.shape());
    CHECK(std::memcmp(u.vec().data(), t.vec().data(),
                      t.vec().size() * sizeof(double)) == 0);
  }
  CHECK_THROWS_AS(nn::load_tensor_map(tmp.file("absent.fls")),
                  flespeech::IoError);
}

TEST_CASE("AdamW minimizes a quadratic and honors the name filter") {
  nn::ParamStore ps;
  ps.create_full("x", {1}, 10.0);
  ps.create_full("y", {1}, 10.0);
  nn::AdamW opt(nn::AdamWConfig{.lr = 0.05});
  for (int i = 0; i < 800; ++i) {
    ps.zero_grads();
    const Var lx = nn::square(nn::add_scalar(nn::use_param(ps, "x"), -3.0));
    const Var ly = nn::square(nn::add_scalar(nn::use_param(ps, "y"), -3.0));
    nn::backward(nn::add(nn::sum_all(lx), nn::sum_all(ly)));
    opt.step(ps, -1.0, {"x"});  // only x moves
  }
  CHECK(ps.value("x").at(0) == doctest::Approx(3.0).epsilon(1e-3));
  CHECK(ps.value("y").at(0) == 10.0);
  CHECK(opt.step_count() == 800);
}

TEST_CASE("AdamW save/load resumes bit-identically") {
  testing::TempDir tmp("nn_opt");
  Rng rng(36);

  nn::ParamStore ps;
  ps.create_gaussian("w", {4, 4}, rng, 1.0);
  const Tensor target = random_tensor({4, 4}, rng);

  auto one_step = [&](nn::ParamStore& store, nn::AdamW& opt) {
    store.zero_grads();
    nn::backward(
        nn::mse_loss(nn::use_param(store, "w"), Var::constant(target)));
    opt.step(store, 1e-2);
  };

  nn::AdamW opt;
  for (int i = 0; i < 7; ++i) one_step(ps, opt);

  // Branch A: keep going in memory. Branch B: round-trip through disk.
  nn::ParamStore ps_b = ps;
  opt.save(tmp.file("opt.fls"));
  ps.save(tmp.file("w.fls"));

  nn::AdamW opt_b;
  opt_b.load(tmp.file("opt.fls"));
  ps_b.load(tmp.file("w.fls"));

  for (int i = 0; i < 5; ++i) {
    one_step(ps, opt);
    one_step(ps_b, opt_b);
  }
  const auto& a = ps.value("w").vec();
  const auto& b = ps_b.value("w").vec();
  CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
  CHECK(opt_b.step_count() == opt.step_count());
}

}  // TEST_SUITE("nn")
