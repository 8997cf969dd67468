#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "vlab/registry.hpp"
#include "vlab/units.hpp"

using namespace vlab;

TEST_CASE("unit parsing") {
  CHECK(parse_quantity("6.24 GHz", Kind::kFrequencyGhz) ==
        doctest::Approx(6.24));
  CHECK(parse_quantity("200 kHz", Kind::kFrequencyHz) ==
        doctest::Approx(2e5));
  CHECK(parse_quantity("0.2 MHz", Kind::kFrequencyHz) ==
        doctest::Approx(2e5));
  CHECK(parse_quantity("4.5 aF", Kind::kCapacitanceAf) ==
        doctest::Approx(4.5));
  CHECK(parse_quantity("400 fF", Kind::kCapacitanceFf) ==
        doctest::Approx(400.0));
  CHECK(parse_quantity("61 us", Kind::kTimeS) == doctest::Approx(61e-6));
  CHECK(parse_quantity("500 ns", Kind::kTimeS) == doctest::Approx(5e-7));
  CHECK(parse_quantity("10 uV", Kind::kVoltageUv) == doctest::Approx(10.0));
  CHECK(parse_quantity("9e-6 e^2/Hz", Kind::kPsdE2PerHz) ==
        doctest::Approx(9e-6));

  SUBCASE("bare numbers are rejected for dimensioned quantities") {
    CHECK_THROWS_AS(parse_quantity("6.24", Kind::kFrequencyGhz),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_quantity("61", Kind::kTimeS),
                    std::invalid_argument);
  }

  SUBCASE("wrong units are rejected") {
    CHECK_THROWS_AS(parse_quantity("6.24 aF", Kind::kFrequencyGhz),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_quantity("10 GHz extra", Kind::kFrequencyGhz),
                    std::invalid_argument);
  }

  SUBCASE("dimensionless quantities must be bare") {
    CHECK(parse_quantity("0.42", Kind::kDimensionless) ==
          doctest::Approx(0.42));
    CHECK_THROWS_AS(parse_quantity("0.42 GHz", Kind::kDimensionless),
                    std::invalid_argument);
  }
}

TEST_CASE("builtin registry carries both devices from the summary table") {
  const Registry reg = Registry::builtin();
  REQUIRE(reg.devices.count("device1") == 1);
  REQUIRE(reg.devices.count("device2") == 1);

  const DeviceRecord& d1 = reg.device("device1");
  CHECK(d1.qubit.e_c_ghz == doctest::Approx(6.24));
  CHECK(d1.qubit.e_j_max_ghz == doctest::Approx(19.0));
  CHECK(d1.qubit.c_g_af == doctest::Approx(4.5));
  CHECK(d1.resonator.f_r_ghz == doctest::Approx(5.446));
  CHECK(d1.resonator.q_loaded == doctest::Approx(22000));
  CHECK(d1.resonator.q_external == doctest::Approx(70000));
  CHECK(d1.resonator.q_internal == doctest::Approx(32000));
  CHECK_FALSE(d1.has_defect_model());

  const DeviceRecord& d2 = reg.device("device2");
  CHECK(d2.qubit.e_c_ghz == doctest::Approx(4.3));
  CHECK(d2.qubit.e_j_max_ghz == doctest::Approx(7.33));
  CHECK(d2.qubit.c_g_af == doctest::Approx(19.1));
  CHECK(d2.resonator.f_r_ghz == doctest::Approx(5.472));
  CHECK(d2.resonator.q_loaded == doctest::Approx(35000));
  CHECK(d2.has_defect_model());
  CHECK(d2.defect_model.branches.size() == 4);

  SUBCASE("summary blocks expose the table entries verbatim") {
    auto find = [](const DeviceRecord& d, const std::string& key) {
      for (const auto& [k, v] : d.summary) {
        if (k == key) return v;
      }
      return std::string();
    };
    CHECK(find(d1, "E_c/h") == "6.24 GHz");
    CHECK(find(d1, "E_J,max/h") == "19 GHz");
    CHECK(find(d2, "C_g") == "19.1 aF");
    CHECK(find(d2, "g/2pi") == "10-15 MHz");
    CHECK(find(d1, "T_2*") == "200-500 ns");
  }

  SUBCASE("registry listing prints every summary field") {
    const std::string text = reg.list_text();
    CHECK(text.find("device1") != std::string::npos);
    CHECK(text.find("6.24 GHz") != std::string::npos);
    CHECK(text.find("10-15 MHz") != std::string::npos);
    CHECK(text.find("psd presets") != std::string::npos);
  }
}

TEST_CASE("PSD presets are addressable by name") {
  const Registry reg = Registry::builtin();
  const NoisePsd& flat = reg.preset("device1-1f");
  CHECK(flat.amplitude_1hz == doctest::Approx(9e-6));
  CHECK_FALSE(flat.soft_cutoff_hz.has_value());

  const NoisePsd& cut = reg.preset("device1-1f-cutoff200k");
  REQUIRE(cut.soft_cutoff_hz.has_value());
  CHECK(*cut.soft_cutoff_hz == doctest::Approx(0.2e6));

  CHECK(reg.preset("device2-1f").amplitude_1hz == doctest::Approx(1e-4));
  CHECK_THROWS_AS(reg.preset("no-such-preset"), std::invalid_argument);
  CHECK_THROWS_AS(reg.device("no-such-device"), std::invalid_argument);
}

TEST_CASE("shipped registry file matches the builtin entries") {
  std::ifstream in(std::string(VLAB_SOURCE_DIR) + "/data/devices.json");
  REQUIRE(in.good());
  std::stringstream buf;
  buf << in.rdbuf();
  const Registry from_file = Registry::parse(buf.str());
  const Registry builtin = Registry::builtin();
  CHECK(from_file.devices.size() == builtin.devices.size());
  CHECK(from_file.psd_presets.size() == builtin.psd_presets.size());
  for (const auto& [name, dev] : builtin.devices) {
    REQUIRE(from_file.devices.count(name) == 1);
    CHECK(from_file.device(name).qubit.e_c_ghz ==
          doctest::Approx(dev.qubit.e_c_ghz));
    CHECK(from_file.device(name).resonator.q_loaded ==
          doctest::Approx(dev.resonator.q_loaded));
  }
}

TEST_CASE("registry overrides") {
  SUBCASE("empty path lists only built-ins") {
    const Registry reg = Registry::with_overrides("");
    CHECK(reg.devices.size() == 2);
  }

  SUBCASE("a custom file adds devices without dropping built-ins") {
    const std::string path = "/tmp/vlab_test_registry.json";
    {
      std::ofstream out(path);
      out << R"({"devices": {"custom": {
        "qubit": {"e_c": "5 GHz", "e_j_max": "10 GHz",
                   "c_g": "6 aF", "c_c": "20 aF"},
        "resonator": {"f_r": "6 GHz", "q_loaded": 20000,
                      "q_external": 60000, "q_internal": 30000,
                      "capacitance": "400 fF", "inductance": "2 nH"}}}})";
    }
    const Registry reg = Registry::with_overrides(path);
    CHECK(reg.devices.size() == 3);
    CHECK(reg.device("custom").qubit.e_c_ghz == doctest::Approx(5.0));
    CHECK(reg.devices.count("device1") == 1);
    std::remove(path.c_str());
  }

  SUBCASE("missing override file is an error") {
    CHECK_THROWS_AS(Registry::with_overrides("/no/such/file.json"),
                    std::runtime_error);
  }
}

TEST_CASE("device models") {
  const Registry reg = Registry::builtin();
  const DeviceRecord& d1 = reg.device("device1");
  const DeviceRecord& d2 = reg.device("device2");

  SUBCASE("coupling interpolates between declared points") {
    CHECK(d1.coupling_at(4.5) == doctest::Approx(0.13));
    CHECK(d1.coupling_at(8.0) == doctest::Approx(0.53));
    CHECK(d1.coupling_at(3.0) == doctest::Approx(d1.coupling_at(4.0)));
    const double mid = d1.coupling_at(6.775);
    CHECK(mid > 0.45);
    CHECK(mid < 0.53);
  }

  SUBCASE("T1 model is quadratic in the decoupling") {
    const double t1_ref = d1.t1_at(4.5);
    CHECK(t1_ref == doctest::Approx(205e-6).epsilon(1e-6));
    const double d_45 = d1.decoupling_at(4.5);
    const double d_80 = d1.decoupling_at(8.0);
    CHECK(d1.t1_at(8.0) ==
          doctest::Approx(205e-6 * (d_80 / d_45) * (d_80 / d_45))
              .epsilon(1e-9));
  }

  SUBCASE("device 2 blind window") {
    CHECK(d2.visible_at(4.5));
    CHECK_FALSE(d2.visible_at(5.5));
    CHECK_FALSE(d2.visible_at(6.4));
    CHECK(d2.visible_at(6.6));
    CHECK(d1.visible_at(5.5));  // no mask on device 1
  }
}
