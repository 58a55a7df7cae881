#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ektau/expression.hpp"
#include "ektau/io.hpp"

using namespace ektau;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

#ifdef EKTAU_CLI_PATH
int run_cli(const std::string& args, const std::string& stdout_path = "") {
    std::string cmd = std::string(EKTAU_CLI_PATH) + " " + args;
    if (!stdout_path.empty()) cmd += " > " + stdout_path + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}
#endif

}  // namespace

TEST_CASE("expression parser", "[io][expression]") {
    SECTION("arithmetic and precedence") {
        CHECK(Expression::parse("1+2*3")(0, 0) == Approx(7.0));
        CHECK(Expression::parse("(1+2)*3")(0, 0) == Approx(9.0));
        CHECK(Expression::parse("2^3^2")(0, 0) == Approx(512.0));  // right associative
        CHECK(Expression::parse("-y^2")(3, 0) == Approx(-9.0));
        CHECK(Expression::parse("2*y - z/4")(1.5, 2.0) == Approx(2.5));
    }
    SECTION("functions and constants") {
        CHECK(Expression::parse("sin(pi/2)")(0, 0) == Approx(1.0));
        CHECK(Expression::parse("exp(log(5))")(0, 0) == Approx(5.0));
        CHECK(Expression::parse("sqrt(1+y^2)")(2, 0) == Approx(std::sqrt(5.0)));
        CHECK(Expression::parse("sinh(2*z)")(0, 0.5) == Approx(std::sinh(1.0)));
    }
    SECTION("named variables through evaluate") {
        const auto e = Expression::parse("x*y + 1");
        CHECK(e.evaluate({{"x", 2.0}, {"y", 3.0}}) == Approx(7.0));
        CHECK_THROWS_AS(e.evaluate({{"x", 2.0}}), DomainError);
    }
    SECTION("parse errors carry positions") {
        CHECK_THROWS_AS(Expression::parse("1 +"), ParseError);
        CHECK_THROWS_AS(Expression::parse("sin(1"), ParseError);
        CHECK_THROWS_AS(Expression::parse("1 $ 2"), ParseError);
        try {
            Expression::parse("2*(y+ )");
        } catch (const ParseError& e) {
            CHECK(std::string(e.what()).find("character") != std::string::npos);
        }
    }
    SECTION("expression jets approximate analytic derivatives") {
        const auto u = Expression::parse("sin(y)*z + y^2");
        const GraphJets j = expression_jets(u, 0.7, -0.3);
        CHECK(j.uy == Approx(std::cos(0.7) * -0.3 + 1.4).margin(1e-9));
        CHECK(j.uz == Approx(std::sin(0.7)).margin(1e-9));
        CHECK(j.uyy == Approx(-std::sin(0.7) * -0.3 + 2.0).margin(1e-7));
        CHECK(j.uyz == Approx(std::cos(0.7)).margin(1e-7));
        CHECK(j.uzz == Approx(0.0).margin(1e-7));
    }
}

TEST_CASE("space and surface configs", "[io][json]") {
    SECTION("space parsing") {
        const auto sp = space_from_json(json{{"kappa", -1.0}, {"tau", 0.5}});
        CHECK(sp.kappa == -1.0);
        CHECK(sp.sigma == Approx(-1.0));
        CHECK_THROWS_AS(space_from_json(json{{"kappa", 1.0}}), ConfigError);
        CHECK_THROWS_AS(space_from_json(json{{"kappa", "x"}, {"tau", 0.0}}), ConfigError);
        CHECK_THROWS_AS(
            space_from_json(json{{"kappa", 0.0}, {"tau", 0.5}, {"sigma", 3.0}}), ConfigError);
    }
    SECTION("surface specs") {
        const auto cyl = surface_spec_from_json(json{{"family", "cylinder"}, {"k_gamma", 1.0}});
        CHECK(cyl.k_gamma == 1.0);
        const auto fmp = surface_spec_from_json(json{{"family", "fmp"}, {"theta", 0.5}});
        CHECK(fmp.theta == 0.5);
        CHECK_THROWS_AS(surface_spec_from_json(json{{"family", "torus"}}), ConfigError);
        CHECK_THROWS_AS(surface_spec_from_json(json{{"family", "cylinder"}}), ConfigError);
    }
    SECTION("built horizontal graphs evaluate their expression") {
        const auto spec =
            surface_spec_from_json(json{{"family", "horizontal_graph"}, {"u", "0.5*y+1"}});
        const Immersion imm = build_surface(SpaceParams::make(0.0, 0.5), spec);
        const AmbientPoint p = imm.position(2.0, 0.0);
        CHECK(p.x == Approx(2.0));       // u(2, 0) = 2
        CHECK(p.z == Approx(0.0 + 0.5 * 2.0 * 2.0));
    }
}

TEST_CASE("CSV round trips and custom grids", "[io][csv]") {
    const fs::path dir = fs::temp_directory_path() / "ektau_io_test";
    fs::create_directories(dir);

    SECTION("write then read") {
        const std::string path = (dir / "table.csv").string();
        write_csv(path, {"a", "b"}, {{1.0, 2.5}, {-3.0, 1e-17}});
        const auto rows = read_csv(path);
        REQUIRE(rows.size() == 2);
        CHECK(rows[1][1] == 1e-17);
        CHECK_FALSE(fs::exists(path + ".tmp"));
    }
    SECTION("custom grid immersion reproduces cylinder curvature") {
        const auto sp = SpaceParams::make(0.0, 0.5);
        const Immersion cyl = cylinder_immersion(sp, 1.0);
        std::vector<std::vector<double>> rows;
        const int n = 41;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double s = -1.0 + 2.0 * i / (n - 1), t = -1.0 + 2.0 * j / (n - 1);
                const AmbientPoint p = cyl.position(s, t);
                rows.push_back({s, t, p.x, p.y, p.z});
            }
        const std::string path = (dir / "cyl.csv").string();
        write_csv(path, {"s", "t", "x", "y", "z"}, rows);
        const GridImmersion gi = grid_immersion_from_csv(sp, path);
        CHECK(gi.ns() == n);
        CHECK(gi.nt() == n);
        const FundamentalForms ff = gi.forms_at(20, 20);
        CHECK(ff.H == Approx(0.5).margin(1e-5));
        CHECK(ff.K_ext == Approx(-0.25).margin(1e-4));
    }
    SECTION("ragged CSV grids are rejected") {
        const std::string path = (dir / "bad.csv").string();
        atomic_write_text(path, "s,t,x,y,z\n0,0,1,2,3\n0,1,1,2,3\n1,0,1,2,3\n");
        CHECK_THROWS_AS(grid_immersion_from_csv(SpaceParams::make(0.0, 0.5), path),
                        ConfigError);
    }
}

#ifdef EKTAU_CLI_PATH
TEST_CASE("command line front end", "[io][cli]") {
    const fs::path dir = fs::temp_directory_path() / "ektau_cli_test";
    fs::create_directories(dir);

    SECTION("curvature reports the closed-form cylinder values") {
        const std::string log = (dir / "curv.txt").string();
        const int rc = run_cli("curvature --space kappa=0,tau=0.5 --surface cylinder:k=1", log);
        CHECK(rc == 0);
        const std::string text = slurp(log);
        CHECK(text.find("H = 0.5") != std::string::npos);
        CHECK(text.find("K_ext = -0.25") != std::string::npos);
    }
    SECTION("spectrum writes deterministic JSON") {
        const std::string out1 = (dir / "s1.json").string(), out2 = (dir / "s2.json").string();
        const std::string args =
            "spectrum --space kappa=-1,tau=0 --surface cylinder:k=0 --domain 1x1 --grid 48";
        CHECK(run_cli(args + " --out " + out1, (dir / "log1.txt").string()) == 0);
        CHECK(run_cli(args + " --out " + out2, (dir / "log2.txt").string()) == 0);
        const std::string a = slurp(out1), b = slurp(out2);
        CHECK(a == b);  // bit-identical artifacts
        const json j = json::parse(a);
        CHECK(j.at("lambda1").get<double>() ==
              Approx(2 * M_PI * M_PI + 1.0).epsilon(0.01));
    }
    SECTION("pde-solve emits the CSV grid and the JSON summary") {
        const std::string prefix = (dir / "sol").string();
        const int rc = run_cli(
            "pde-solve --domain 0,1,0,1 --grid 17 --boundary \"0.5*y\" --out-prefix " + prefix,
            (dir / "pde.txt").string());
        CHECK(rc == 0);
        const json j = json::parse(slurp(prefix + ".json"));
        CHECK(j.at("residual_sup").get<double>() < 1e-8);
        CHECK(j.at("min_abs_eta_X").get<double>() > 0.0);
        CHECK(read_csv(prefix + ".csv").size() == 17 * 17);
    }
    SECTION("boundary traces from CSV reproduce the expression path") {
        // sample g = 0.3 y + 0.1 on the boundary nodes of a 17x17 grid
        std::vector<std::vector<double>> rows;
        const int n = 17;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                if (i != 0 && i != n - 1 && j != 0 && j != n - 1) continue;
                const double y = i / (n - 1.0), z = j / (n - 1.0);
                rows.push_back({y, z, 0.3 * y + 0.1});
            }
        const std::string trace = (dir / "trace.csv").string();
        write_csv(trace, {"y", "z", "value"}, rows);
        const std::string prefix = (dir / "traced").string();
        const int rc = run_cli("pde-solve --domain 0,1,0,1 --grid 17 --boundary-csv " + trace +
                                   " --out-prefix " + prefix,
                               (dir / "trace_log.txt").string());
        CHECK(rc == 0);
        const auto table = read_csv(prefix + ".csv");
        double err = 0.0;
        for (const auto& r : table) err = std::max(err, std::abs(r[2] - (0.3 * r[0] + 0.1)));
        CHECK(err < 1e-8);
    }
    SECTION("validation failures exit with status 1") {
        CHECK(run_cli("spectrum --space kappa=1,tau=0.5 --surface cylinder:k=0",
                      (dir / "err1.txt").string()) == 1);
        CHECK(run_cli("curvature --space kappa=0 --surface cylinder:k=0",
                      (dir / "err2.txt").string()) == 1);
        const std::string cfg = (dir / "bad.json").string();
        atomic_write_text(cfg, "{\"schema\": 1, \"space\": {\"kappa\": 0}}");
        CHECK(run_cli("spectrum --config " + cfg, (dir / "err3.txt").string()) == 1);
        CHECK(slurp((dir / "err3.txt").string()).find("tau") != std::string::npos);
        atomic_write_text(cfg, "{not json");
        CHECK(run_cli("spectrum --config " + cfg, (dir / "err4.txt").string()) == 1);
    }
    SECTION("config files require the schema marker") {
        const std::string cfg = (dir / "noschema.json").string();
        atomic_write_text(cfg, "{\"space\": {\"kappa\": 0, \"tau\": 0.5}}");
        CHECK(run_cli("spectrum --config " + cfg, (dir / "err5.txt").string()) == 1);
        CHECK(slurp((dir / "err5.txt").string()).find("schema") != std::string::npos);
    }
}
#endif
