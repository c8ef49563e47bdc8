#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "isoctl/error.hpp"
#include "isoctl/scenario.hpp"

using namespace isoctl;

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

ErrorCode code_of(const std::string& text) {
  try {
    parse_scenario_text(text);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

const char* kMinimal = R"({
  "name": "t",
  "domain": "circle:2pi",
  "generators": "circle:1",
  "experiment": {"kind": "evolve"}
})";

}  // namespace

TEST_CASE("shipped scenarios are canonical and match the built-in demos") {
  const std::filesystem::path dir = std::filesystem::path(ISOCTL_SOURCE_DIR) / "scenarios";
  std::size_t n = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto text = read_file(entry.path());
    const auto s = parse_scenario_text(text);
    CHECK(emit_scenario(s) == text);
    CHECK(emit_scenario(parse_scenario_text(emit_scenario(s))) == text);
    ++n;
  }
  CHECK(n >= 2);
  for (const char* name : {"demo-eight", "demo-torus"})
    CHECK(emit_scenario(default_demo_scenario(name)) == read_file(dir / (std::string(name) + ".json")));
}

TEST_CASE("scenario defaults and hashing") {
  const auto s = parse_scenario_text(kMinimal);
  CHECK(s.potential == "0");
  CHECK(s.seed == 0);
  CHECK_FALSE(s.experiment.nodes.has_value());
  // FNV-1a reference values.
  CHECK(fnv1a("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cull);
  const auto h = scenario_hash(s);
  CHECK(h.size() == 16);
  auto t = s;
  t.seed = 7;
  CHECK(scenario_hash(t) != h);
  CHECK(artifact_header(t) == std::string("isoctl ") + kVersion + " scenario=" + scenario_hash(t) + " seed=7");
}

TEST_CASE("scenario errors") {
  const std::string robin = R"({
  "name": "t",
  "domain": "interval:pi",
  "bc": "robin",
  "generators": ["1"],
  "experiment": {"kind": "evolve"}
})";
  CHECK(code_of(robin) == ErrorCode::UnknownDomain);
  try {
    parse_scenario_text(robin);
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 4") != std::string::npos);
  }
  std::string unknown_gen = kMinimal;
  unknown_gen.replace(unknown_gen.find("circle:1"), 8, "circle:x");
  CHECK(code_of(unknown_gen) == ErrorCode::UnknownGenerator);
  std::string wrong_domain = kMinimal;
  wrong_domain.replace(wrong_domain.find("circle:1"), 8, "eight");
  CHECK(code_of(wrong_domain) == ErrorCode::UnknownGenerator);
  CHECK(code_of("{ \"name\": ") == ErrorCode::ParseError);
  std::string extra = kMinimal;
  extra.replace(extra.find("\"kind\""), 6, "\"kinds\"");
  CHECK(code_of(extra) == ErrorCode::ParseError);
  std::string neg = kMinimal;
  neg.replace(neg.find("\"evolve\"}"), 9, "\"evolve\", \"delta\": -1}");
  CHECK(code_of(neg) == ErrorCode::ParseError);
}

TEST_CASE("state specs") {
  auto s = parse_scenario_text(kMinimal);
  s.experiment.nodes = 64;
  auto run = prepare_run(s);
  CHECK(l2_norm(state_from_spec("const", run.ctx)) == doctest::Approx(1.0));
  CHECK(l2_norm(state_from_spec("plane:3", run.ctx)) == doctest::Approx(1.0));
  CHECK(l2_norm(state_from_spec("mode:5", run.ctx)) == doctest::Approx(1.0));
  CHECK_THROWS_AS(state_from_spec("wave:1", run.ctx), Error);
  CHECK_THROWS_AS(state_from_spec("mode:9999", run.ctx), Error);
}
