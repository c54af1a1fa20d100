#include "doctest.h"

#include "mcem/approx/adam.hpp"
#include "mcem/approx/network.hpp"
#include "mcem/approx/tensor_io.hpp"
#include "mcem/oracle/gradient_checks.hpp"
#include "mcem/oracle/oracle.hpp"

#include <sstream>

using namespace mcem;
using namespace mcem::approx;

TEST_CASE("glorot init stays inside the bound and zeroes biases") {
  NetSpec spec{{7, 16, 3}, Activation::elu, false, 0, 0};
  const ParamStore p = init_params(spec, 4);
  for (const auto& [name, e] : p.entries()) {
    if (e.value.cols() == 1) {
      CHECK(e.value.isZero());
    } else {
      const Scalar bound = glorot_bound(e.value.cols(), e.value.rows());
      CHECK(e.value.cwiseAbs().maxCoeff() <= bound);
    }
  }
}

TEST_CASE("same seed gives identical parameters, different seeds differ") {
  NetSpec spec{{5, 8, 2}, Activation::tanh, true, 6, 0};
  CHECK(identical(init_params(spec, 11), init_params(spec, 11)));
  CHECK_FALSE(identical(init_params(spec, 11), init_params(spec, 12)));
}

TEST_CASE("network backward matches finite differences") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    CHECK(oracle::check_network_gradient(seed, false).pass(1e-4));
    CHECK(oracle::check_network_gradient(seed, true).pass(1e-4));
  }
}

TEST_CASE("single-step encoding matches the sequence encoding") {
  NetSpec spec{{4, 8, 2}, Activation::elu, true, 5, 0};
  Network net(spec);
  const ParamStore p = init_params(spec, 3);
  Rng rng = make_rng(3, 0);
  std::normal_distribution<Scalar> nd;
  Mat x(4, 6);
  for (Index i = 0; i < x.size(); ++i) x(i) = nd(rng);
  const Mat enc = net.encode(p, x);
  Vec h = Vec::Zero(5);
  for (Index t = 0; t < x.cols(); ++t) {
    const Vec e = net.encode_step(p, x.col(t), h);
    CHECK((e - enc.col(t)).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("adam first step moves each coordinate by the learning rate") {
  ParamStore p;
  p.add("w", 3, 1);
  p.value("w") << 1.0, -2.0, 0.5;
  p.grad("w") << 4.0, -0.1, 1e-3;
  OptimState opt;
  opt.learning_rate = 0.01;
  adam_update(p, opt);
  CHECK(p.value("w")(0) == doctest::Approx(0.99).epsilon(1e-9));
  CHECK(p.value("w")(1) == doctest::Approx(-1.99).epsilon(1e-9));
  CHECK(p.value("w")(2) == doctest::Approx(0.49).epsilon(1e-4));
  CHECK(opt.steps == 1);

  ParamStore q;
  q.add("w", 1, 1);
  q.value("w")(0) = 0.0;
  q.grad("w")(0) = 1.0;
  OptimState up;
  up.learning_rate = 0.1;
  adam_update(q, up, true);
  CHECK(q.value("w")(0) == doctest::Approx(0.1));
}

TEST_CASE("adam on a quadratic converges") {
  ParamStore p;
  p.add("x", 2, 1);
  p.value("x") << 3.0, -4.0;
  OptimState opt;
  opt.learning_rate = 0.05;
  for (int i = 0; i < 2000; ++i) {
    p.grad("x") = 2.0 * p.value("x");
    adam_update(p, opt);
  }
  CHECK(p.value("x").norm() < 1e-3);
}

TEST_CASE("tensor files round-trip bit-exactly") {
  TensorList in{{"a", Mat::Random(3, 4)}, {"b/c", Mat::Constant(1, 1, -0.0)}, {"empty", Mat(0, 2)}};
  in[0].second(1, 1) = std::numeric_limits<Scalar>::denorm_min();
  std::stringstream buf;
  write_tensors(buf, in);
  const TensorList out = read_tensors(buf);
  REQUIRE(out.size() == in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    CHECK(out[i].first == in[i].first);
    CHECK(out[i].second.rows() == in[i].second.rows());
    CHECK(out[i].second.cols() == in[i].second.cols());
    CHECK(std::memcmp(out[i].second.data(), in[i].second.data(), sizeof(Scalar) * in[i].second.size()) == 0);
  }
  CHECK(buf.str().substr(0, 4) == "MCEM");
}

TEST_CASE("tensor reader rejects bad magic and truncation") {
  std::stringstream bad("NOPE....");
  CHECK_THROWS_AS(read_tensors(bad), LoadError);
  std::stringstream buf;
  write_tensors(buf, {{"a", Mat::Ones(2, 2)}});
  std::string s = buf.str();
  std::stringstream cut(s.substr(0, s.size() - 3));
  CHECK_THROWS_AS(read_tensors(cut), LoadError);
}

TEST_CASE("finite_diff on simple objectives") {
  ParamStore p;
  p.add("t", 4, 1);
  p.value("t") << 1.0, -2.0, 0.25, 3.0;
  const auto g = oracle::finite_diff(p, [&] { return p.value("t").squaredNorm(); });
  CHECK((g.at("t") - 2.0 * p.value("t")).cwiseAbs().maxCoeff() < 1e-8);
  const auto z = oracle::finite_diff(p, [] { return 7.0; });
  CHECK(z.at("t").cwiseAbs().maxCoeff() < 1e-8);
}
