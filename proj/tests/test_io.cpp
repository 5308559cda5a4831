#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "porostab/io/config.hpp"
#include "porostab/io/writers.hpp"

using namespace porostab;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream is(path);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("defaults are filled for a minimal config") {
    const RunConfig c = parse_config(R"({"mode":"homog"})");
    REQUIRE(c.mode == "homog");
    REQUIRE(c.params.beta2 == Catch::Approx(0.1305));
    REQUIRE(c.params.beta3 == Catch::Approx(0.7695));
    REQUIRE(c.params.beta1 == Catch::Approx(170.0));
    REQUIRE(c.params.E == Catch::Approx(3e4));
    REQUIRE(c.seed == 1);
    REQUIRE(!c.has_params);
}

TEST_CASE("parameter overrides and enums") {
    const RunConfig c = parse_config(
        R"({"mode":"dispersion","params":{"beta2":0.2,"theta":"quadratic","k_dir":[0,1]},
            "k_range":[0.1,10],"k_count":7,"k_log":false,"regime":"general","seed":99})");
    REQUIRE(c.params.beta2 == Catch::Approx(0.2));
    REQUIRE(c.params.theta_variant == ThetaVariant::Quadratic);
    REQUIRE(c.params.k_dir[1] == 1.0);
    REQUIRE(c.k_count == 7);
    REQUIRE(!c.k_log);
    REQUIRE(c.seed == 99);
    REQUIRE(c.has_params);
}

TEST_CASE("strict schema") {
    SECTION("unknown top-level key") {
        REQUIRE_THROWS_AS(parse_config(R"({"mode":"homog","extra":1})"), SchemaError);
    }
    SECTION("unknown parameter key names its path") {
        try {
            parse_config(R"({"mode":"homog","params":{"beta9":1}})");
            FAIL("expected SchemaError");
        } catch (const SchemaError& e) {
            REQUIRE(std::string(e.what()).find("params.beta9") != std::string::npos);
        }
    }
    SECTION("map without ranges names param_range") {
        try {
            parse_config(R"({"mode":"map","param":"beta2"})");
            FAIL("expected SchemaError");
        } catch (const SchemaError& e) {
            REQUIRE(std::string(e.what()).find("param_range") != std::string::npos);
        }
    }
    SECTION("missing mode") {
        REQUIRE_THROWS_AS(parse_config(R"({"seed":3})"), SchemaError);
    }
    SECTION("bad JSON") {
        REQUIRE_THROWS_AS(parse_config("{mode:"), SchemaError);
    }
    SECTION("bad values") {
        REQUIRE_THROWS_AS(parse_config(R"({"mode":"fly"})"), ValueError);
        REQUIRE_THROWS_AS(
            parse_config(R"({"mode":"map","param":"beta2","param_range":[1.0,0.5]})"),
            ValueError);
        REQUIRE_THROWS_AS(parse_config(R"({"mode":"simulate","scenario":"test9"})"),
                          ValueError);
    }
    SECTION("simulate preset passes through") {
        const RunConfig c = parse_config(R"({"mode":"simulate","scenario":"test2"})");
        REQUIRE(c.scenario == "test2");
    }
}

TEST_CASE("config round trip") {
    for (const char* text :
         {R"({"mode":"homog"})",
          R"({"mode":"map","param":"tau","param_range":[1.0,1e6],"param_count":40,
              "k_range":[0.01,100],"k_count":50,"expression":"C4","rho_mode":"quasistatic"})",
          R"({"mode":"patterning","n_beta2":50,"n_beta3":60})",
          R"({"mode":"simulate","scenario":"test3","dt":0.01,"t_final":0.5,"tau2":20})"}) {
        const RunConfig a = parse_config(text);
        const RunConfig b = parse_config(write_config(a));
        REQUIRE(a == b);
    }
}

TEST_CASE("field CSV round trip is bitwise identical") {
    LevelSetField f;
    f.k_values = {0.1, 1.0, 10.0};
    f.param_values = {0.25, 0.5};
    f.values.resize(3, 2);
    f.values << 1.0 / 3.0, -2.0e-17, 3.5, 4.0, -5.25, 6.0e30;
    const std::string p1 = "/tmp/porostab_field_a.csv", p2 = "/tmp/porostab_field_b.csv";
    write_field_csv(f, p1);
    const LevelSetField r = read_field_csv(p1);
    REQUIRE(r.values.rows() == 3);
    REQUIRE(r.values.cols() == 2);
    write_field_csv(r, p2);
    REQUIRE(slurp(p1) == slurp(p2));
    std::remove(p1.c_str());
    std::remove(p2.c_str());
}

TEST_CASE("small writers") {
    SECTION("2x2 field gives header plus two rows") {
        LevelSetField f;
        f.k_values = {1.0, 2.0};
        f.param_values = {3.0, 4.0};
        f.values = Eigen::MatrixXd::Zero(2, 2);
        const std::string p = "/tmp/porostab_2x2.csv";
        write_field_csv(f, p);
        std::ifstream is(p);
        std::string line;
        int n = 0;
        while (std::getline(is, line)) ++n;
        REQUIRE(n == 3);
        std::remove(p.c_str());
    }
    SECTION("curve writer emits k,max_re_phi rows") {
        const std::string p = "/tmp/porostab_curve.csv";
        write_curve_csv({1.0, 2.0, 3.0}, {-0.5, 0.25, -1.0}, p);
        std::ifstream is(p);
        std::string line;
        std::getline(is, line);
        REQUIRE(line == "k,max_re_phi");
        int rows = 0;
        while (std::getline(is, line)) ++rows;
        REQUIRE(rows == 3);
        std::remove(p.c_str());
        REQUIRE_THROWS_AS(write_curve_csv({1.0}, {1.0, 2.0}, p), IoError);
    }
    SECTION("contours are NaN separated") {
        LevelSetField f;
        f.contour_polylines = {{{0.0, 0.0}, {1.0, 1.0}}, {{2.0, 2.0}, {3.0, 3.0}}};
        const std::string p = "/tmp/porostab_contours.csv";
        write_contours_csv(f, p);
        const std::string text = slurp(p);
        REQUIRE(text.find("NaN,NaN") != std::string::npos);
        std::remove(p.c_str());
    }
    SECTION("unwritable path raises IoError") {
        LevelSetField f;
        REQUIRE_THROWS_AS(write_field_csv(f, "/nonexistent/dir/x.csv"), IoError);
    }
}

TEST_CASE("vtk writer") {
    Mesh m;
    m.vertices = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
    m.triangles = {{0, 1, 2}};
    detail::tag_boundary(m, [](double, double) { return BoundaryTag::Gamma; });
    const DofMap dm = build_spaces(m);
    FemState s = FemState::zero(dm);
    ModelParams p;
    const SteadyState ss = steady_state(p);
    s.w1.setConstant(ss.w10);
    const std::string path = "/tmp/porostab_snap.vtk";
    write_vtk(m, dm, s, path);
    const std::string text = slurp(path);
    REQUIRE(text.find("CELLS 1 4") != std::string::npos);
    REQUIRE(text.find("VECTORS displacement double") != std::string::npos);
    REQUIRE(text.find("SCALARS total_pressure double 1") != std::string::npos);
    // equilibrium w1 is the constant beta2 + beta3
    REQUIRE(text.find(fmt17(p.beta2 + p.beta3)) != std::string::npos);
    std::remove(path.c_str());
    SECTION("size mismatch rejected") {
        FemState bad = s;
        bad.p.resize(1);
        REQUIRE_THROWS_AS(write_vtk(m, dm, bad, path), IoError);
    }
}

TEST_CASE("probe series writer matches the stride count") {
    std::vector<ProbeSample> series(4);
    for (int i = 0; i < 4; ++i) series[i].t = 0.1 * i;
    const std::string p = "/tmp/porostab_probes.csv";
    write_probes_csv(series, p);
    std::ifstream is(p);
    std::string line;
    std::getline(is, line);
    REQUIRE(line == "t,w1_probe,w2_std,psi_min,psi_max,mass_w1,mass_w2,newton_iterations");
    int rows = 0;
    while (std::getline(is, line)) ++rows;
    REQUIRE(rows == 4);
    std::remove(p.c_str());
}
