#include "esl/formula.hpp"

#include <algorithm>
#include <functional>
#include <memory>
#include <mutex>
#include <sstream>
#include <unordered_set>

namespace esl {

std::string ExtendedAgent::to_string() const {
  switch (kind) {
    case Kind::Base:
      return name;
    case Kind::Sigma:
      return "sigma(" + name + ")";
    case Kind::Env:
      return "env";
  }
  return {};
}

namespace {

std::size_t hash_combine(std::size_t seed, std::size_t v) {
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

std::size_t node_hash(const FormulaNode& n) {
  std::size_t h = static_cast<std::size_t>(n.op);
  for (const Formula& k : n.kids)
    h = hash_combine(h, reinterpret_cast<std::size_t>(k.node()));
  h = hash_combine(h, std::hash<std::string>{}(n.text));
  for (const auto& a : n.group) {
    h = hash_combine(h, static_cast<std::size_t>(a.kind));
    h = hash_combine(h, std::hash<std::string>{}(a.name));
  }
  for (const auto& m : n.coalition) h = hash_combine(h, std::hash<std::string>{}(m));
  return h;
}

bool node_equal(const FormulaNode& a, const FormulaNode& b) {
  return a.op == b.op && a.kids == b.kids && a.text == b.text && a.group == b.group &&
         a.coalition == b.coalition;
}

struct NodePtrHash {
  std::size_t operator()(const FormulaNode* n) const { return n->hash; }
};
struct NodePtrEq {
  bool operator()(const FormulaNode* a, const FormulaNode* b) const {
    return node_equal(*a, *b);
  }
};

// Global intern pool. Nodes live for the process lifetime; formulas are
// cheap pointer copies and structural equality is pointer equality.
struct Pool {
  std::mutex mutex;
  std::unordered_set<const FormulaNode*, NodePtrHash, NodePtrEq> table;
  std::vector<std::unique_ptr<FormulaNode>> storage;
};

Pool& pool() {
  static Pool p;
  return p;
}

AgentGroup normalize(AgentGroup g) {
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

}  // namespace

Formula Formula::intern(FormulaNode node) {
  node.hash = node_hash(node);
  Pool& p = pool();
  std::lock_guard<std::mutex> lock(p.mutex);
  auto it = p.table.find(&node);
  if (it != p.table.end()) return Formula(*it);
  p.storage.push_back(std::make_unique<FormulaNode>(std::move(node)));
  const FormulaNode* stored = p.storage.back().get();
  p.table.insert(stored);
  return Formula(stored);
}

Formula Formula::tt() { return intern({Op::True, {}, {}, {}, {}, 0}); }
Formula Formula::ff() { return intern({Op::False, {}, {}, {}, {}, 0}); }
Formula Formula::prop(const std::string& name) {
  return intern({Op::Prop, {}, name, {}, {}, 0});
}
Formula Formula::lnot(Formula f) { return intern({Op::Not, {f}, {}, {}, {}, 0}); }
Formula Formula::land(Formula a, Formula b) {
  return intern({Op::And, {a, b}, {}, {}, {}, 0});
}
Formula Formula::lor(Formula a, Formula b) {
  return intern({Op::Or, {a, b}, {}, {}, {}, 0});
}
Formula Formula::implies(Formula a, Formula b) {
  return intern({Op::Implies, {a, b}, {}, {}, {}, 0});
}
Formula Formula::ax(Formula f) { return intern({Op::AX, {f}, {}, {}, {}, 0}); }
Formula Formula::ex(Formula f) { return intern({Op::EX, {f}, {}, {}, {}, 0}); }
Formula Formula::au(Formula a, Formula b) {
  return intern({Op::AU, {a, b}, {}, {}, {}, 0});
}
Formula Formula::eu(Formula a, Formula b) {
  return intern({Op::EU, {a, b}, {}, {}, {}, 0});
}
Formula Formula::af(Formula f) { return intern({Op::AF, {f}, {}, {}, {}, 0}); }
Formula Formula::ef(Formula f) { return intern({Op::EF, {f}, {}, {}, {}, 0}); }
Formula Formula::ag(Formula f) { return intern({Op::AG, {f}, {}, {}, {}, 0}); }
Formula Formula::eg(Formula f) { return intern({Op::EG, {f}, {}, {}, {}, 0}); }
Formula Formula::knows(ExtendedAgent who, Formula f) {
  return intern({Op::Knows, {f}, {}, {std::move(who)}, {}, 0});
}
Formula Formula::dk(AgentGroup group, Formula f) {
  return intern({Op::Dk, {f}, {}, normalize(std::move(group)), {}, 0});
}
Formula Formula::ck(AgentGroup group, Formula f) {
  return intern({Op::Ck, {f}, {}, normalize(std::move(group)), {}, 0});
}
Formula Formula::ek(AgentGroup group, Formula f) {
  return intern({Op::Ek, {f}, {}, normalize(std::move(group)), {}, 0});
}
Formula Formula::exists(const std::string& var, Formula f) {
  return intern({Op::Exists, {f}, var, {}, {}, 0});
}
Formula Formula::forall(const std::string& var, Formula f) {
  return intern({Op::Forall, {f}, var, {}, {}, 0});
}
Formula Formula::loc(ExtendedAgent who, const std::string& var) {
  return intern({Op::LocEq, {}, var, {std::move(who)}, {}, 0});
}
Formula Formula::loc_group(AgentGroup group, const std::string& var) {
  return intern({Op::LocEqGroup, {}, var, normalize(std::move(group)), {}, 0});
}
Formula Formula::coalition(Op kind, std::vector<std::string> h, AgentGroup g, Formula f) {
  std::sort(h.begin(), h.end());
  h.erase(std::unique(h.begin(), h.end()), h.end());
  return intern({kind, {f}, {}, normalize(std::move(g)), std::move(h), 0});
}

// ---------------------------------------------------------------------------
// Unparsing

namespace {

// precedence levels, loosest first: quantifier 0 < -> 1 < | 2 < & 3 < unary 4
int precedence(Op op) {
  switch (op) {
    case Op::Exists:
    case Op::Forall:
      return 0;
    case Op::Implies:
      return 1;
    case Op::Or:
      return 2;
    case Op::And:
      return 3;
    case Op::Not:
    case Op::AX:
    case Op::EX:
    case Op::AF:
    case Op::EF:
    case Op::AG:
    case Op::EG:
    case Op::Knows:
    case Op::Dk:
    case Op::Ck:
    case Op::Ek:
    case Op::CoalitionC:
    case Op::CoalitionD:
    case Op::CoalitionE:
      return 4;
    default:
      return 5;  // atoms
  }
}

std::string group_string(const AgentGroup& g) {
  std::string out = "{";
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (i) out += ",";
    out += g[i].to_string();
  }
  return out + "}";
}

void print(const Formula& f, int min_level, std::string& out) {
  int level = precedence(f.op());
  bool parens = level < min_level;
  if (parens) out += "(";
  switch (f.op()) {
    case Op::True:
      out += "true";
      break;
    case Op::False:
      out += "false";
      break;
    case Op::Prop:
      out += f.text();
      break;
    case Op::Not:
      out += "~";
      print(f.kid(0), 4, out);
      break;
    case Op::And:
      print(f.kid(0), 3, out);
      out += " & ";
      print(f.kid(1), 4, out);
      break;
    case Op::Or:
      print(f.kid(0), 2, out);
      out += " | ";
      print(f.kid(1), 3, out);
      break;
    case Op::Implies:
      print(f.kid(0), 2, out);
      out += " -> ";
      print(f.kid(1), 1, out);
      break;
    case Op::AX:
    case Op::EX:
    case Op::AF:
    case Op::EF:
    case Op::AG:
    case Op::EG: {
      switch (f.op()) {
        case Op::AX: out += "AX "; break;
        case Op::EX: out += "EX "; break;
        case Op::AF: out += "AF "; break;
        case Op::EF: out += "EF "; break;
        case Op::AG: out += "AG "; break;
        default: out += "EG "; break;
      }
      print(f.kid(0), 4, out);
      break;
    }
    case Op::AU:
      out += "A[";
      print(f.kid(0), 0, out);
      out += " U ";
      print(f.kid(1), 0, out);
      out += "]";
      break;
    case Op::EU:
      out += "E[";
      print(f.kid(0), 0, out);
      out += " U ";
      print(f.kid(1), 0, out);
      out += "]";
      break;
    case Op::Knows:
      out += "K " + f.group()[0].to_string() + " ";
      print(f.kid(0), 4, out);
      break;
    case Op::Dk:
      out += "D" + group_string(f.group()) + " ";
      print(f.kid(0), 4, out);
      break;
    case Op::Ck:
      out += "C" + group_string(f.group()) + " ";
      print(f.kid(0), 4, out);
      break;
    case Op::Ek:
      out += "E" + group_string(f.group()) + " ";
      print(f.kid(0), 4, out);
      break;
    case Op::Exists:
      out += "exists " + f.text() + " . ";
      print(f.kid(0), 0, out);
      break;
    case Op::Forall:
      out += "forall " + f.text() + " . ";
      print(f.kid(0), 0, out);
      break;
    case Op::LocEq:
      out += "loc(" + f.group()[0].to_string() + ", " + f.text() + ")";
      break;
    case Op::LocEqGroup:
      out += "loc(" + group_string(f.group()) + ", " + f.text() + ")";
      break;
    case Op::CoalitionC:
    case Op::CoalitionD:
    case Op::CoalitionE: {
      out += "<<";
      const auto& h = f.coalition_members();
      for (std::size_t i = 0; i < h.size(); ++i) {
        if (i) out += ",";
        out += h[i];
      }
      out += ">>";
      out += f.op() == Op::CoalitionC ? "_C" : f.op() == Op::CoalitionD ? "_D" : "_E";
      out += group_string(f.group()) + " ";
      print(f.kid(0), 4, out);
      break;
    }
    default:
      out += "<?>";
      break;
  }
  if (parens) out += ")";
}

}  // namespace

std::string Formula::to_string() const {
  std::string out;
  print(*this, 0, out);
  return out;
}

// ---------------------------------------------------------------------------
// Derived-form expansion

namespace {

void collect_variables(Formula f, std::set<std::string>& vars) {
  if (f.op() == Op::Exists || f.op() == Op::Forall || f.op() == Op::LocEq ||
      f.op() == Op::LocEqGroup)
    vars.insert(f.text());
  for (std::size_t i = 0; i < f.arity(); ++i) collect_variables(f.kid(i), vars);
}

struct Expander {
  std::set<std::string> used_vars;
  int fresh_counter = 0;
  std::vector<std::string>* warnings;

  std::string fresh_var() {
    for (;;) {
      std::string candidate = "_x" + std::to_string(fresh_counter++);
      if (!used_vars.count(candidate)) {
        used_vars.insert(candidate);
        return candidate;
      }
    }
  }

  Formula conjunction_over(const AgentGroup& group,
                           const std::function<Formula(const ExtendedAgent&)>& make) {
    if (group.empty()) return Formula::tt();
    Formula acc = make(group[0]);
    for (std::size_t i = 1; i < group.size(); ++i) acc = Formula::land(acc, make(group[i]));
    return acc;
  }

  Formula expand(Formula f) {
    // children first
    std::vector<Formula> kids;
    kids.reserve(f.arity());
    for (std::size_t i = 0; i < f.arity(); ++i) kids.push_back(expand(f.kid(i)));

    switch (f.op()) {
      case Op::True:
      case Op::False:
      case Op::Prop:
      case Op::LocEq:
        return f;
      case Op::Not:
        return Formula::lnot(kids[0]);
      case Op::And:
        return Formula::land(kids[0], kids[1]);
      case Op::Or:
        return Formula::lor(kids[0], kids[1]);
      case Op::Implies:
        return Formula::implies(kids[0], kids[1]);
      case Op::AX:
        return Formula::ax(kids[0]);
      case Op::EX:
        return Formula::ex(kids[0]);
      case Op::AU:
        return Formula::au(kids[0], kids[1]);
      case Op::EU:
        return Formula::eu(kids[0], kids[1]);
      case Op::Dk:
        return Formula::dk(f.group(), kids[0]);
      case Op::Ck:
        if (f.group().empty()) return kids[0];  // C over the empty group is identity
        return Formula::ck(f.group(), kids[0]);
      case Op::Exists:
        return Formula::exists(f.text(), kids[0]);

      case Op::Knows:
        return Formula::dk({f.group()[0]}, kids[0]);
      case Op::Ek: {
        if (f.group().empty()) {
          if (warnings)
            warnings->push_back("E{} over the empty group is vacuously true");
          return Formula::tt();
        }
        return conjunction_over(f.group(), [&](const ExtendedAgent& w) {
          return Formula::dk({w}, kids[0]);
        });
      }
      case Op::LocEqGroup:
        return conjunction_over(f.group(), [&](const ExtendedAgent& w) {
          return Formula::loc(w, f.text());
        });
      case Op::Forall:
        return Formula::lnot(Formula::exists(f.text(), Formula::lnot(kids[0])));
      case Op::EF:
        return Formula::eu(Formula::tt(), kids[0]);
      case Op::AF:
        return Formula::au(Formula::tt(), kids[0]);
      case Op::AG:
        return Formula::lnot(Formula::eu(Formula::tt(), Formula::lnot(kids[0])));
      case Op::EG:
        return Formula::lnot(Formula::au(Formula::tt(), Formula::lnot(kids[0])));

      case Op::CoalitionC:
      case Op::CoalitionD:
      case Op::CoalitionE: {
        std::string x = fresh_var();
        AgentGroup sigma_h;
        for (const auto& name : f.coalition_members())
          sigma_h.push_back(ExtendedAgent::sigma(name));
        Formula guard = conjunction_over(sigma_h, [&](const ExtendedAgent& w) {
          return Formula::loc(w, x);
        });
        Formula body = Formula::implies(guard, kids[0]);
        Formula know;
        if (f.op() == Op::CoalitionC) {
          know = f.group().empty() ? body : Formula::ck(f.group(), body);
        } else if (f.op() == Op::CoalitionD) {
          know = Formula::dk(f.group(), body);
        } else {
          know = expand(Formula::ek(f.group(), body));
        }
        return Formula::exists(x, know);
      }
    }
    return f;
  }
};

}  // namespace

Formula expand_derived(Formula f, std::vector<std::string>* warnings) {
  Expander expander;
  expander.warnings = warnings;
  collect_variables(f, expander.used_vars);
  return expander.expand(f);
}

// ---------------------------------------------------------------------------

namespace {

void free_vars_rec(Formula f, std::set<std::string>& bound, std::set<std::string>& out) {
  switch (f.op()) {
    case Op::LocEq:
    case Op::LocEqGroup:
      if (!bound.count(f.text())) out.insert(f.text());
      return;
    case Op::Exists:
    case Op::Forall: {
      bool was_bound = bound.count(f.text()) > 0;
      bound.insert(f.text());
      free_vars_rec(f.kid(0), bound, out);
      if (!was_bound) bound.erase(f.text());
      return;
    }
    default:
      for (std::size_t i = 0; i < f.arity(); ++i) free_vars_rec(f.kid(i), bound, out);
  }
}

}  // namespace

std::set<std::string> free_variables(Formula f) {
  std::set<std::string> bound, out;
  free_vars_rec(f, bound, out);
  return out;
}

ValidationReport check_well_formed(Formula f, const Environment& env) {
  ValidationReport report;
  std::set<const FormulaNode*> seen;

  std::function<void(Formula)> walk = [&](Formula g) {
    if (!seen.insert(g.node()).second) return;
    switch (g.op()) {
      case Op::Prop:
        if (!env.find_proposition(g.text()))
          report.add("undeclared-proposition", "undeclared proposition " + g.text(), g.text());
        break;
      case Op::True:
      case Op::False:
      case Op::Not:
      case Op::And:
      case Op::Or:
      case Op::Implies:
      case Op::AX:
      case Op::EX:
      case Op::AU:
      case Op::EU:
      case Op::AF:
      case Op::EF:
      case Op::AG:
      case Op::EG:
      case Op::Exists:
      case Op::Forall:
      case Op::Dk:
      case Op::Ck:
      case Op::Ek:
      case Op::Knows:
      case Op::LocEq:
      case Op::LocEqGroup:
      case Op::CoalitionC:
      case Op::CoalitionD:
      case Op::CoalitionE:
        break;  // all remaining operators are inside the supported fragment
    }
    for (const auto& w : g.group()) {
      if (w.kind != ExtendedAgent::Kind::Env && !env.agent_id(w.name))
        report.add("unknown-agent", "unknown agent " + w.name, w.name);
    }
    for (const auto& h : g.coalition_members()) {
      if (!env.agent_id(h))
        report.add("unknown-agent", "unknown agent " + h, h);
    }
    for (std::size_t i = 0; i < g.arity(); ++i) walk(g.kid(i));
  };
  walk(f);
  return report;
}

}  // namespace esl
