#pragma once

// Random well-typed programs and worlds for engine equivalence runs.

#include <string>
#include <vector>

#include "sgl/scenarios.hpp"

namespace sgl::testing {

struct GeneratedCase {
  std::string source;
  std::string world;
};

class ProgramGen {
 public:
  explicit ProgramGen(std::uint64_t seed) : rng_(seed) {}

  GeneratedCase make(std::size_t max_objects) {
    GeneratedCase g;
    for (int c = 0; c < 2; ++c) g.source += class_def(c);
    for (int c = 0; c < 2; ++c) {
      if (chance(0.85)) g.source += script(c);
      int handlers = static_cast<int>(rng_.below(3));
      for (int h = 0; h < handlers; ++h) g.source += handler(c);
    }
    g.world = world(max_objects);
    return g;
  }

 private:
  struct Env {
    int cls = 0;
    std::vector<std::string> nums;  // readable number expressions
    std::vector<std::string> ints;
    std::vector<std::string> refs;  // ref<other class> expressions
    std::string loop;               // current extent loop var (other class), or ""
    int depth = 0;                  // statement nesting
    int accum_depth = 0;
    bool in_block1 = false;
    bool in_atomic = false;
    bool top = true;
    bool rand_ok = true;  // handler conditions may not draw
  };

  WorldRng rng_;
  int fresh_ = 0;
  std::string comb_[2][2];   // number effects e0, e1 per class
  std::string icomb_[2];
  std::string bcomb_[2];

  bool chance(double p) { return rng_.uniform() < p; }
  template <class T>
  const T& pick(const std::vector<T>& v) { return v[rng_.below(v.size())]; }
  static std::string cname(int c) { return c == 0 ? "Hero" : "Mob"; }
  std::string name(const char* p) { return p + std::to_string(fresh_++); }

  std::string lit() {
    static const std::vector<std::string> v = {"0", "1", "2", "0.5", "-1.5", "3", "10", "0.25"};
    return pick(v);
  }

  std::string class_def(int c) {
    static const std::vector<std::string> ncombs = {"sum", "sum", "avg", "min", "max"};
    static const std::vector<std::string> icombs = {"sum", "max", "min", "count"};
    static const std::vector<std::string> bcombs = {"or", "and"};
    comb_[c][0] = pick(ncombs);
    comb_[c][1] = pick(ncombs);
    icomb_[c] = pick(icombs);
    bcomb_[c] = pick(bcombs);
    std::string o = cname(1 - c);
    std::string s = "class " + cname(c) + " {\nstate:\n";
    s += "  number x = 0;\n  number y = 0;\n  number r = 2;\n  number h = 5;\n  int k = 0;\n  bool flag = false;\n";
    s += "  number budget = 20;\n  ref<" + o + "> peer = null;\n  set<ref<" + o + ">> pals = {};\n";
    s += "effects:\n";
    s += "  number e0 : " + comb_[c][0] + ";\n  number e1 : " + comb_[c][1] + ";\n";
    s += "  int ek : " + icomb_[c] + ";\n  bool eb : " + bcomb_[c] + ";\n  number spend : sum;\n";
    s += "  set<ref<" + o + ">> meet : setUnion;\n";
    s += "update:\n";
    s += "  x = min(500, max(-500, x + e0));\n";
    s += "  y = min(500, max(-500, " + std::string(chance(0.5) ? "y + e1" : "y * 0.5 + e1 + e0") + "));\n";
    s += "  h = " + std::string(chance(0.5) ? "h - e1 * 0.1" : "min(100, h + e0)") + ";\n";
    s += "  k = (k + ek) % 97;\n  flag = eb;\n  budget = budget - spend;\n  pals = union(pals, meet);\n";
    s += "constraints:\n  budget >= 0;\n}\n\n";
    return s;
  }

  Env base(int c) {
    Env e;
    e.cls = c;
    e.nums = {"x", "y", "r", "h", "budget", "this.x"};
    e.ints = {"k"};
    e.refs = {"peer"};
    return e;
  }

  std::string num(const Env& e, int d) {
    if (d <= 0 || chance(0.3)) {
      double p = rng_.uniform();
      if (p < 0.25) return lit();
      if (p < 0.8) return pick(e.nums);
      if (p < 0.88 && !e.refs.empty()) return pick(e.refs) + ".x";
      if (p < 0.94 && e.rand_ok) return "random()";
      return "toNumber(" + pick(e.ints) + ")";
    }
    switch (rng_.below(8)) {
      case 0: return "(" + num(e, d - 1) + " + " + num(e, d - 1) + ")";
      case 1: return "(" + num(e, d - 1) + " - " + num(e, d - 1) + ")";
      case 2: return "(" + num(e, d - 1) + " * " + num(e, d - 1) + ")";
      case 3: return chance(0.3) ? "(" + num(e, d - 1) + " / " + num(e, d - 1) + ")" : "abs(" + num(e, d - 1) + ")";
      case 4: return "min(" + num(e, d - 1) + ", " + num(e, d - 1) + ")";
      case 5: return "max(" + num(e, d - 1) + ", " + num(e, d - 1) + ")";
      case 6: return "floor(" + num(e, d - 1) + ")";
      default: return "-(" + num(e, d - 1) + ")";
    }
  }

  std::string integer(const Env& e) {
    switch (rng_.below(4)) {
      case 0: return std::to_string(rng_.below(5));
      case 1: return pick(e.ints);
      case 2: return "(" + pick(e.ints) + " + " + std::to_string(1 + rng_.below(3)) + ")";
      default: return "size(pals)";
    }
  }

  std::string boolean(const Env& e, int d) {
    if (d <= 0 || chance(0.4)) {
      static const std::vector<std::string> ops = {"<", "<=", ">", ">=", "==", "!="};
      double p = rng_.uniform();
      if (p < 0.7) return num(e, 1) + " " + pick(ops) + " " + num(e, 1);
      if (p < 0.8) return "flag";
      if (p < 0.9 && !e.refs.empty()) return pick(e.refs) + (chance(0.5) ? " == null" : " != null");
      return e.rand_ok ? "random() < " + lit() : "flag";
    }
    switch (rng_.below(3)) {
      case 0: return "(" + boolean(e, d - 1) + " && " + boolean(e, d - 1) + ")";
      case 1: return "(" + boolean(e, d - 1) + " || " + boolean(e, d - 1) + ")";
      default: return "!(" + boolean(e, d - 1) + ")";
    }
  }

  std::string ind(const Env& e) { return std::string(static_cast<std::size_t>(2 * (e.depth + 1)), ' '); }

  std::string block(Env e, int n) {
    std::string s;
    for (int i = 0; i < n; ++i) s += stmt(e);
    return s;
  }

  std::string effect_write(const Env& e) {
    std::string in = ind(e);
    std::string target = e.in_block1 && !e.loop.empty() && chance(0.3) ? e.loop + "." : (chance(0.15) ? "peer." : "");
    switch (rng_.below(5)) {
      case 0: return in + target + "ek <- " + integer(e) + ";\n";
      case 1: return in + target + "eb <- " + boolean(e, 1) + ";\n";
      case 2: return in + target + "e1 <- " + num(e, 2) + ";\n";
      case 3: return in + "meet <= " + (e.loop.empty() ? std::string("peer") : e.loop) + ";\n";
      default: return in + target + "e0 <- " + num(e, 2) + ";\n";
    }
  }

  std::string stmt(Env& e) {
    std::string in = ind(e);
    double p = rng_.uniform();
    bool nest = e.depth < 3;
    if (p < 0.3) return effect_write(e);
    if (p < 0.4) {
      std::string l = name("l");
      std::string s = in + "let " + l + " = " + num(e, 2) + ";\n";
      e.nums.push_back(l);
      return s;
    }
    if (p < 0.55 && nest) {
      Env inner = e;
      inner.depth++;
      inner.top = false;
      std::string s = in + "if (" + boolean(e, 2) + ") {\n" + block(inner, 1 + static_cast<int>(rng_.below(2))) + in + "}";
      if (chance(0.5)) s += " else {\n" + block(inner, 1) + in + "}";
      return s + "\n";
    }
    if (p < 0.72 && nest && e.accum_depth < 2 && !e.in_block1) return accum(e);
    if (p < 0.8 && !e.in_atomic && !e.in_block1 && nest) {
      Env inner = e;
      inner.depth++;
      inner.in_atomic = true;
      inner.top = false;
      std::string s = in + "atomic {\n";
      s += ind(inner) + (chance(0.2) ? "peer." : "") + "spend <- " + num(e, 1) + ";\n";
      s += block(inner, static_cast<int>(rng_.below(2)));
      return s + in + "}\n";
    }
    if (p < 0.85 && !e.in_block1) {
      std::string o = cname(rng_.below(2) == 0 ? e.cls : 1 - e.cls);
      std::string s = in + "if (random() < 0.04) { spawn " + o + "(x: " + num(e, 1) + ", h: " + num(e, 1);
      if (chance(0.5)) s += ", k: " + integer(e);
      return s + "); }\n";
    }
    if (p < 0.89 && !e.in_block1) {
      if (chance(0.5)) return in + "if (random() < 0.03) { destroy this; }\n";
      return in + "if (random() < 0.03) { destroy peer; }\n";
    }
    if (p < 0.95 && e.top && !e.in_atomic && !e.in_block1 && e.accum_depth == 0) {
      e.nums = base(e.cls).nums;  // locals die at a tick boundary
      return in + "waitNextTick;\n";
    }
    if (p < 0.97 && !e.in_atomic && !e.in_block1 && e.accum_depth == 0) {
      return in + "if (" + boolean(e, 1) + ") { restart; }\n";
    }
    return effect_write(e);
  }

  std::string accum(Env& e) {
    static const std::vector<std::string> combs = {"sum", "sum", "sum", "min", "max", "count", "avg"};
    std::string in = ind(e);
    std::string a = name("a"), v = name("v");
    std::string comb = pick(combs);
    std::string other = cname(1 - e.cls);
    Env b1 = e;
    b1.depth++;
    b1.top = false;
    b1.in_block1 = true;
    b1.accum_depth++;
    std::string s;
    bool extent = chance(0.7);
    if (extent) {
      b1.loop = v;
      b1.nums.push_back(v + ".x");
      b1.nums.push_back(v + ".h");
      b1.refs.push_back(v + ".peer");
      s = in + "accum number " + a + " with " + comb + " over " + other + " " + v + " from " + other + " {\n";
      std::string box = v + ".x >= x - r && " + v + ".x <= x + r";
      if (chance(0.6)) box += " && " + v + ".y >= y - " + lit() + " && " + v + ".y <= y + r";
      if (chance(0.4)) box += " && " + boolean(b1, 1);
      Env b2 = b1;
      b2.depth++;
      s += ind(b1) + "if (" + box + ") {\n";
      s += ind(b2) + a + " <- " + num(b2, 1) + ";\n";
      if (chance(0.5)) s += effect_write(b2);
      s += ind(b1) + "}\n";
      if (chance(0.3)) s += ind(b1) + a + " <- " + lit() + ";\n";
    } else {
      b1.nums.push_back(v + ".x");
      b1.refs.push_back(v);
      s = in + "accum number " + a + " with " + comb + " over ref<" + other + "> " + v + " from pals {\n";
      s += ind(b1) + a + " <- " + num(b1, 1) + ";\n";
      if (chance(0.4)) s += effect_write(b1);
    }
    Env b2 = e;
    b2.depth++;
    b2.top = false;
    b2.accum_depth++;
    b2.nums.push_back(a);
    s += in + "} in {\n" + block(b2, 1 + static_cast<int>(rng_.below(2))) + in + "}\n";
    return s;
  }

  std::string script(int c) {
    Env e = base(c);
    std::string s = "run go" + std::to_string(c) + "(this: " + cname(c) + ") {\n";
    s += block(e, 2 + static_cast<int>(rng_.below(5)));
    return s + "}\n\n";
  }

  std::string handler(int c) {
    Env e = base(c);
    e.depth = 0;
    e.top = false;
    Env cond = e;
    cond.rand_ok = false;
    std::string s = "on " + cname(c) + " when (" + boolean(cond, 1) + ")" + (chance(0.4) ? " restart" : "") + " {\n";
    s += effect_write(e);
    return s + "}\n\n";
  }

  std::string world(std::size_t max_objects) {
    std::size_t n = 1 + rng_.below(max_objects);
    std::vector<int> cls(n);
    std::vector<std::vector<std::size_t>> of(2);
    for (std::size_t i = 0; i < n; ++i) {
      cls[i] = static_cast<int>(rng_.below(2));
      of[static_cast<std::size_t>(cls[i])].push_back(i + 1);
    }
    double side = 4.0 + rng_.uniform(0, 40);
    std::string s = R"({"objects": [)";
    for (std::size_t i = 0; i < n; ++i) {
      const auto& others = of[static_cast<std::size_t>(1 - cls[i])];
      std::string peer = !others.empty() && chance(0.7) ? std::to_string(pick(others)) : "null";
      std::string pals = "[";
      if (!others.empty()) {
        std::size_t m = rng_.below(4);
        for (std::size_t j = 0; j < m; ++j) pals += (j ? "," : "") + std::to_string(pick(others));
      }
      pals += "]";
      if (i) s += ",";
      s += R"({"class": ")" + cname(cls[i]) + R"(", "id": )" + std::to_string(i + 1) + R"(, "fields": {)";
      s += R"("x": )" + std::to_string(rng_.uniform(0, side)) + R"(, "y": )" + std::to_string(rng_.uniform(0, side));
      s += R"(, "r": )" + std::to_string(rng_.uniform(0.5, 6)) + R"(, "h": )" + std::to_string(rng_.uniform(0, 10));
      s += R"(, "k": )" + std::to_string(rng_.below(10)) + R"(, "budget": )" + std::to_string(rng_.uniform(0, 30));
      s += R"(, "flag": )" + std::string(chance(0.5) ? "true" : "false");
      s += R"(, "peer": )" + peer + R"(, "pals": )" + pals + "}}";
    }
    return s + "]}";
  }
};

inline GeneratedCase random_case(std::uint64_t seed, std::size_t max_objects = 200) {
  return ProgramGen(seed).make(max_objects);
}

}  // namespace sgl::testing
