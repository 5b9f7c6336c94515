#include <doctest.h>

#include <filesystem>

#include "lieexp/serialize.hpp"

using namespace lieexp;
using nlohmann::json;

TEST_CASE("elements round-trip through JSON") {
  CentralElement x = CentralElement::of(VectField::mode(2, cplx(0.5, -1)) + VectField::mode(-3, cplx(0.25)));
  x.central = cplx(0.1, 0.2);
  const CentralElement y = element_from_json(to_json(x));
  CHECK(y.vect.coeffs == x.vect.coeffs);
  CHECK(y.central == x.central);
  const CentralElement l = CentralElement::of(LoopElement::basis(FiniteLieAlgebra::sl2(), 0, 1, cplx(2.0)));
  const CentralElement l2 = element_from_json(to_json(l));
  CHECK(l2.kind == AlgebraKind::Loop);
  CHECK(l2.loop.at(1) == l.loop.at(1));
  CHECK_THROWS_AS(element_from_json(json{{"kind", "spin"}}), ValidationError);
}

TEST_CASE("specs round-trip and accept rational strings") {
  const HighestWeightSpec s = spec_from_json(json{{"kind", "virasoro"}, {"c", "1/2"}, {"h", "1/16"}, {"N", 6}});
  CHECK(s.c.exact() == frac(1, 2));
  CHECK(spec_key(spec_from_json(spec_to_json(s))) == spec_key(s));
  const HighestWeightSpec a = HighestWeightSpec::affine(1, 1, 4);
  CHECK(spec_from_json(spec_to_json(a)).canonical() == a.canonical());
  CHECK(spec_key(a) != spec_key(s));
  CHECK(spec_key(s).size() == 16);
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
}

TEST_CASE("module artifacts round-trip exactly") {
  const ModulePtr m = build_module(HighestWeightSpec::virasoro(Number(frac(1, 2)), Number(frac(1, 16)), 6));
  const GradedModule back = module_from_json(json::parse(module_to_json(*m).dump()));
  CHECK(back.dims == m->dims);
  CHECK(back.null_counts == m->null_counts);
  for (int n = -6; n <= 6; ++n) CHECK((back.L(n) - m->L(n)).norm() == 0.0);
}

TEST_CASE("cached and freshly built modules give identical operators") {
  const auto dir = std::filesystem::temp_directory_path() / "lieexp-test-cache";
  std::filesystem::remove_all(dir);
  const HighestWeightSpec s = HighestWeightSpec::affine(1, 0, 4);
  bool cached = true;
  const ModulePtr fresh = load_or_build(s, dir.string(), &cached);
  CHECK_FALSE(cached);
  const ModulePtr again = load_or_build(s, dir.string(), &cached);
  CHECK(cached);
  for (int n = -4; n <= 4; ++n) {
    CHECK((fresh->L(n) - again->L(n)).norm() == 0.0);
    for (int g = 0; g < 3; ++g) CHECK((fresh->x(g, n) - again->x(g, n)).norm() == 0.0);
  }
  std::filesystem::remove_all(dir);
}
