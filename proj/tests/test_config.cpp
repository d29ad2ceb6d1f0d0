#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "charger/config.hpp"
#include "charger/serialize.hpp"

using namespace charger;

namespace {

const char* kMinimal = R"(charger:
  v_d: 800
  r_ds_on: 0.035
  r_l: 1
  r_c: 1.5
  r_b: 1
  l: 9.5e-3
  c: 100e-9
  f_s: 27e3
)";

std::string read_all(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("bundled configuration reproduces the reference charger") {
  const auto cfg = load_config(std::string(CHARGER_SOURCE_DIR) + "/configs/reference.cfg");
  CHECK(cfg.params == reference_charger());
  CHECK_FALSE(cfg.gains.has_value());
  CHECK(cfg.scenario == Scenario::reference(reference_charger()));
  CHECK(cfg.delta_i_l == doctest::Approx(1.5));
  CHECK(cfg.delta_v_c == doctest::Approx(24.0));
  CHECK(parse_config(read_all(std::string(CHARGER_SOURCE_DIR) + "/configs/reference.cfg")) ==
        reference_config());
}

TEST_CASE("minimal document takes defaults") {
  const auto doc = parse_config(kMinimal);
  CHECK(doc.charger == reference_charger());
  const auto cfg = resolve(doc);
  CHECK(cfg.scenario.h == doctest::Approx(1.0 / 27e3 / 200.0));
  CHECK(cfg.scenario.mode == SimMode::switched);
  CHECK(cfg.modulator.d_max == 1.0);
}

TEST_CASE("missing required key is named") {
  std::string text = kMinimal;
  text.erase(text.find("  l: 9.5e-3\n"), 12);
  CHECK_THROWS_WITH_AS(parse_config(text), doctest::Contains("charger.l"), ConfigError);
}

TEST_CASE("unknown keys are rejected") {
  std::string text = std::string(kMinimal) + "  r_x: 3\n";
  CHECK_THROWS_WITH_AS(parse_config(text), doctest::Contains("charger.r_x"), ConfigError);
  text = std::string(kMinimal) + "extras:\n  a: 1\n";
  CHECK_THROWS_WITH_AS(parse_config(text), doctest::Contains("extras"), ConfigError);
}

TEST_CASE("invalid values are rejected") {
  std::string text = kMinimal;
  text.replace(text.find("l: 9.5e-3"), 9, "l: -1");
  CHECK_THROWS_AS(resolve(parse_config(text)), ValidationError);
  CHECK_THROWS_AS(parse_config(std::string(kMinimal) + "control:\n  d_min: abc\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("charger: [1, 2\n"), ConfigError);
  CHECK_THROWS_AS(resolve(parse_config(std::string(kMinimal) + "control:\n  k_p: 1\n")),
                  ConfigError);
}

TEST_CASE("ripple budgets") {
  SUBCASE("percent of the operating point") {
    const auto cfg = resolve(parse_config(std::string(kMinimal) +
                                          "sizing:\n  delta_il: 5 %\n  delta_vc: 5 %\n"));
    CHECK(cfg.delta_i_l == doctest::Approx(1.5));   // 5 % of 30 A
    CHECK(cfg.delta_v_c == doctest::Approx(24.0));  // 5 % of 450 V + 1 ohm * 30 A
  }
  SUBCASE("absolute") {
    const auto cfg = resolve(parse_config(std::string(kMinimal) +
                                          "sizing:\n  delta_il: 0.14 A\n  delta_vc: 0.02 V\n"));
    CHECK(cfg.delta_i_l == doctest::Approx(0.14));
    CHECK(cfg.delta_v_c == doctest::Approx(0.02));
  }
  SUBCASE("wrong unit") {
    CHECK_THROWS_AS(parse_config(std::string(kMinimal) + "sizing:\n  delta_il: 3 V\n"), ConfigError);
  }
}

TEST_CASE("configuration round trip") {
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int n = 0; n < 200; ++n) {
    ConfigDocument doc;
    doc.charger.r_ds_on = u(rng);
    doc.charger.r_l = 10.0 * u(rng);
    doc.charger.r_c = 0.1 + u(rng);
    doc.charger.r_b = 0.1 + u(rng);
    doc.charger.inductance = 1e-3 * (0.1 + u(rng));
    doc.charger.capacitance = 1e-7 * (0.1 + u(rng));
    doc.charger.f_s = 1e4 * (1.0 + u(rng));
    doc.v_d = 100.0 + 900.0 * u(rng);
    if (n % 2 == 0) {
      doc.k_p = u(rng);
      doc.tau_i = 1e-3 * (0.1 + u(rng));
    }
    doc.d_max = 0.5 + 0.5 * u(rng);
    doc.omega = n % 3 == 0 ? OmegaConvention::fs : OmegaConvention::two_pi_fs;
    if (n % 4 == 0) doc.h = 1e-7 * (1.0 + u(rng));
    doc.duration = u(rng);
    doc.ref_steps = {{0.0, 10.0 * u(rng)}, {0.5, 20.0 * u(rng)}};
    doc.mode = n % 2 ? SimMode::averaged : SimMode::switched;
    doc.delta_il = {u(rng), n % 2 == 0};
    doc.delta_vc = {u(rng), n % 3 == 0};
    const auto text = write_config(doc);
    REQUIRE(parse_config(text) == doc);
  }
}

TEST_CASE("number formatting and CSV schema") {
  CHECK(format_number(1.0) == "1");
  CHECK(format_number(0.1234567891234) == "0.123456789");
  CHECK(format_number(582.678132678) == "582.678133");
  CHECK(format_number(NAN) == "nan");
  CHECK(format_number(-INFINITY) == "-inf");
  CHECK(round9(0.1234567891234) == 0.123456789);

  Trace tr;
  tr.samples.push_back({0.0, 1.0, 2.0, 3.0, 0.5, 1.0, 450.0, 30.0, 0.0, 0.0});
  std::ostringstream os;
  write_trace_csv(os, tr);
  CHECK(os.str() == std::string(kTraceCsvHeader) + "\n0,1,2,3,0.5,1,450,30\n");
}

TEST_CASE("atomic file writes") {
  const auto dir = std::filesystem::temp_directory_path() / "charger_atomic_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "out.csv").string();
  write_file_atomic(path, [](std::ostream& os) { os << "first\n"; });
  CHECK(read_all(path) == "first\n");
  CHECK_THROWS(write_file_atomic(path, [](std::ostream& os) {
    os << "partial";
    throw std::runtime_error("boom");
  }));
  CHECK(read_all(path) == "first\n");
  CHECK_FALSE(std::filesystem::exists(path + ".tmp"));
  std::filesystem::remove_all(dir);
}
