#include <doctest.h>

#include <sstream>

#include "interx/dgp.hpp"
#include "interx/error.hpp"
#include "interx/panel.hpp"
#include "support.hpp"

using namespace interx;

namespace {

PanelDataset parse(const std::string& text, const CsvSchema& schema = {}) {
  std::istringstream in(text);
  return read_csv(in, schema);
}

DgpConfig baseline_config(std::size_t n) {
  DgpConfig c = load_dgp_config(INTERX_SOURCE_DIR "/configs/dgp_baseline.json");
  c.n = n;
  return c;
}

}  // namespace

TEST_CASE("read_csv: shape bookkeeping") {
  const auto ds = parse("unit,time,y,x1\n1,1,0.5,1\n1,2,0.7,2\n1,3,0.1,3\n2,1,1,4\n2,2,2,5\n2,3,3,6\n");
  CHECK(ds.dims == Dims{2, 3, 1, 0, 0, 0});
  CHECK(ds.y(1, 2) == 3.0);
  CHECK(ds.x[0](2, 0) == 3.0);
  CHECK(ds.unit_labels == std::vector<std::string>{"1", "2"});
}

TEST_CASE("read_csv: rows are sorted by unit then time") {
  const auto ds = parse(
      "time,unit,y,x1,h1\n"
      "2,10,4,1,0.5\n1,10,3,2,0.5\n2,9,2,3,1.5\n1,9,1,4,1.5\n");
  CHECK(ds.unit_labels == std::vector<std::string>{"9", "10"});
  CHECK(ds.time_labels == std::vector<std::string>{"1", "2"});
  CHECK(ds.y(0, 0) == 1.0);
  CHECK(ds.y(1, 1) == 4.0);
  CHECK(ds.h(0, 0) == 1.5);
}

TEST_CASE("read_csv: auto-detected columns ordered by suffix") {
  const auto ds = parse("unit,time,y,x2,x10,x1,z1,g1\n1,1,0,2,10,1,5,6\n1,2,0,2,10,1,5,6\n1,3,0,2,10,1,5,6\n2,1,0,2,10,1,5,6\n2,2,0,2,10,1,5,6\n2,3,0,2,10,1,5,6\n");
  CHECK(ds.names.x == std::vector<std::string>{"x1", "x2", "x10"});
  CHECK(ds.x[0](0, 2) == 10.0);
  CHECK(ds.dims.kg == 1);
  CHECK(ds.dims.kz == 1);
}

TEST_CASE("read_csv: explicit schema and quoted fields") {
  CsvSchema s;
  s.unit = "id";
  s.time = "year";
  s.y = "wage";
  s.x = {"educ", "one"};
  s.h = {"female"};
  const auto ds = parse(
      "id,year,wage,educ,one,female\n"
      "\"a\",2000,1.0,12,1,0\n\"a\",2001,1.5,13,1,0\n\"a\",2002,1.5,14,1,0\n"
      "b,2000,2.0,16,1,1\nb,2001,2.5,16.5,1,1\nb,2002,2.5,17,1,1\n",
      s);
  CHECK(ds.dims == Dims{2, 3, 2, 0, 0, 1});
  CHECK(ds.unit_labels == std::vector<std::string>{"a", "b"});
  CHECK(ds.names.x == s.x);
  CHECK(ds.h(1, 0) == 1.0);
}

TEST_CASE("read_csv: errors") {
  SUBCASE("missing column") {
    try {
      parse("unit,time,x1\n1,1,1\n");
      FAIL("expected MissingColumn");
    } catch (const MissingColumn& e) {
      CHECK(e.column() == "y");
    }
  }
  SUBCASE("no x columns") { CHECK_THROWS_AS(parse("unit,time,y\n1,1,1\n"), MissingColumn); }
  SUBCASE("non-constant h") {
    try {
      parse("unit,time,y,x1,h1\n7,1,0,1,0.2\n7,2,0,2,0.3\n8,1,0,1,1\n8,2,0,1,1\n");
      FAIL("expected NonConstantH");
    } catch (const NonConstantH& e) {
      CHECK(e.unit() == "7");
      CHECK(e.column() == "h1");
    }
  }
  SUBCASE("unbalanced") {
    try {
      parse("unit,time,y,x1\n1,1,0,1\n1,2,0,1\n2,1,0,1\n");
      FAIL("expected UnbalancedPanel");
    } catch (const UnbalancedPanel& e) {
      CHECK(e.unit() == "2");
    }
  }
  SUBCASE("duplicate cell") {
    CHECK_THROWS_AS(parse("unit,time,y,x1\n1,1,0,1\n1,1,0,1\n2,1,0,1\n2,2,0,1\n"), UnbalancedPanel);
  }
  SUBCASE("non-finite value") {
    try {
      parse("unit,time,y,x1\n1,1,0,1\n1,2,nan,1\n2,1,0,1\n2,2,0,1\n");
      FAIL("expected NonFiniteValue");
    } catch (const NonFiniteValue& e) {
      CHECK(e.row() == 3);
    }
  }
  SUBCASE("not a number") { CHECK_THROWS_AS(parse("unit,time,y,x1\n1,1,abc,1\n2,1,0,1\n"), DataError); }
  SUBCASE("ragged row") { CHECK_THROWS_AS(parse("unit,time,y,x1\n1,1,0\n2,1,0,1\n"), DataError); }
}

TEST_CASE("write_csv then read_csv is the identity") {
  const auto truth = simulate(baseline_config(60));
  std::stringstream buf;
  write_csv(truth.data, buf);
  const auto back = read_csv(buf);
  CHECK(back.dims == truth.data.dims);
  CHECK(back.names == truth.data.names);
  CHECK(back.unit_labels == truth.data.unit_labels);
  CHECK(back.time_labels == truth.data.time_labels);
  CHECK(back.y == truth.data.y);
  CHECK(back.h == truth.data.h);
  for (std::size_t i = 0; i < back.dims.n; ++i) {
    CHECK(back.x[i] == truth.data.x[i]);
    CHECK(back.g[i] == truth.data.g[i]);
    CHECK(back.z[i] == truth.data.z[i]);
  }
  std::stringstream again;
  write_csv(back, again);
  CHECK(again.str() == buf.str());
}

TEST_CASE("Dims::check") {
  CHECK_NOTHROW(Dims{2, 1, 1, 0, 0, 0}.check());
  CHECK_THROWS_AS((Dims{1, 3, 1, 0, 0, 0}.check()), InvalidArgument);
  CHECK_THROWS_AS((Dims{5, 3, 0, 0, 0, 0}.check()), InvalidArgument);
  CHECK_THROWS_AS((Dims{5, 2, 3, 0, 0, 0}.check()), InvalidArgument);
}

TEST_CASE("subset and with_intercept_h") {
  const auto ds = test::random_panel({5, 3, 1, 1, 1, 1}, 4);
  const std::vector<std::size_t> pick{4, 0, 4};
  const auto sub = ds.subset(pick);
  CHECK(sub.dims.n == 3);
  CHECK(sub.y.row(0) == ds.y.row(4));
  CHECK(sub.y.row(2) == ds.y.row(4));
  CHECK(sub.x[1] == ds.x[0]);
  const auto withc = ds.with_intercept_h();
  CHECK(withc.dims.kh == 2);
  CHECK(withc.h.col(1) == Vector::Ones(5));
  CHECK(withc.names.h.back() == "h_const");
}

TEST_CASE("validate: rank-deficient unit is flagged") {
  auto ds = test::random_panel({6, 2, 2, 0, 0, 1}, 8);
  ds.x[3] << 1.0, 2.0, 1.0, 2.0;  // both columns constant
  const auto rep = validate(ds);
  CHECK(rep.failing_rank_x == std::vector<std::string>{"4"});
  CHECK(std::abs(rep.units[3].det_x) < 1e-12);
  CHECK_FALSE(rep.units[3].rank_x_ok);
  CHECK_FALSE(rep.passed());
  CHECK(rep.retained_units().size() == 5);
}

TEST_CASE("validate: duplicated H column") {
  auto ds = test::random_panel({30, 4, 1, 0, 1, 2}, 9);
  ds.h.col(1) = ds.h.col(0);
  const auto rep = validate(ds);
  CHECK(rep.units_ok());
  CHECK_FALSE(rep.h.ok);
  CHECK(rep.h.margin < 1e-10);
  CHECK_FALSE(rep.passed());
}

TEST_CASE("validate: simulated baseline passes") {
  const auto truth = simulate(baseline_config(100));
  const auto rep = validate(truth.data);
  CHECK(rep.passed());
  CHECK(rep.psi.margin > 0.05);
  CHECK(rep.psi_tilde.margin > 0.05);
  CHECK(rep.h.margin > 0.05);
  for (const auto& u : rep.units) {
    CHECK(u.det_x_ratio > 0.0);
    CHECK(u.det_x_ratio <= 1.0 + 1e-12);
  }
}

TEST_CASE("validate: scale-free unit check") {
  auto ds = test::random_panel({10, 4, 2, 0, 0, 0}, 12);
  const auto base = validate(ds);
  for (auto& x : ds.x) x *= 1e6;
  const auto scaled = validate(ds);
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(scaled.units[i].det_x_ratio == doctest::Approx(base.units[i].det_x_ratio).epsilon(1e-9));
  }
}

TEST_CASE("build_psi: empty Kronecker block is Z") {
  const auto ds = test::random_panel({4, 3, 1, 0, 1, 0}, 1);
  for (std::size_t i = 0; i < 4; ++i) CHECK(build_psi(ds, i) == ds.z[i]);
}

TEST_CASE("build_psi: scalar X and G") {
  const auto ds = test::random_panel({3, 4, 1, 1, 1, 1}, 2);
  const Matrix psi = build_psi(ds, 1);
  CHECK(psi.col(0) == ds.x[1].col(0).cwiseProduct(ds.g[1].col(0)));
  CHECK(psi.col(1) == ds.z[1].col(0));
  const Matrix pt = build_psi_tilde(ds, 1, psi);
  CHECK(pt.col(0) == ds.x[1].col(0) * ds.h(1, 0));
  CHECK(pt.rightCols(2) == psi);
}

TEST_CASE("build_regressors: Kronecker block against a double loop") {
  const Dims dims{7, 5, 3, 2, 2, 2};
  const auto ds = test::random_panel(dims, 77);
  const auto dr = build_regressors(ds);
  CHECK(dr.psi_labels.size() == dims.psi_cols());
  CHECK(dr.psi_tilde_labels.size() == dims.psi_tilde_cols());
  CHECK(dr.psi_labels[0] == "phi[x1*g1]");
  CHECK(dr.psi_labels[1] == "phi[x1*g2]");
  CHECK(dr.psi_labels[6] == "gamma[z1]");
  CHECK(dr.psi_tilde_labels[0] == "kappa[h1]");
  for (std::size_t i = 0; i < dims.n; ++i) {
    const auto& psi = dr.psi[i];
    REQUIRE(psi.cols() == static_cast<Eigen::Index>(dims.psi_cols()));
    REQUIRE(dr.psi_tilde[i].cols() == static_cast<Eigen::Index>(dims.psi_tilde_cols()));
    for (Eigen::Index t = 0; t < 5; ++t) {
      for (Eigen::Index k = 0; k < 3; ++k)
        for (Eigen::Index g = 0; g < 2; ++g) CHECK(psi(t, k * 2 + g) == ds.x[i](t, k) * ds.g[i](t, g));
      for (Eigen::Index m = 0; m < 2; ++m) CHECK(psi(t, 6 + m) == ds.z[i](t, m));
      for (Eigen::Index h = 0; h < 2; ++h)
        CHECK(dr.psi_tilde[i](t, h) == ds.x[i](t, 0) * ds.h(static_cast<Eigen::Index>(i), h));
    }
    CHECK((dr.m[i] * ds.x[i]).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((dr.m_minus1[i] * ds.x[i].rightCols(2)).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("build_regressors: rank-deficient unit named in the error") {
  auto ds = test::random_panel({3, 3, 2, 0, 0, 0}, 5);
  ds.x[2].col(1) = ds.x[2].col(0);
  try {
    build_regressors(ds);
    FAIL("expected RankDeficient");
  } catch (const RankDeficient& e) {
    REQUIRE(e.unit());
    CHECK(*e.unit() == "3");
  }
}
