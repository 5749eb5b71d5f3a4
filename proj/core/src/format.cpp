#include "sgl/format.hpp"

#include <cmath>
#include <cstdio>

namespace sgl {

namespace {

int precedence(const Expr& e) {
  if (e.kind == Expr::Kind::Unary) return 7;
  if (e.kind != Expr::Kind::Binary) return 8;
  switch (e.bop) {
    case BinOp::Or: return 1;
    case BinOp::And: return 2;
    case BinOp::Eq:
    case BinOp::Ne: return 3;
    case BinOp::Lt:
    case BinOp::Le:
    case BinOp::Gt:
    case BinOp::Ge: return 4;
    case BinOp::Add:
    case BinOp::Sub: return 5;
    default: return 6;
  }
}

std::string number_text(double d) {
  if (std::isinf(d)) return d > 0 ? "1e999" : "-1e999";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", d);
  std::string s = buf;
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') {
      out += '\\';
      out += c;
    } else if (c == '\n') {
      out += "\\n";
    } else if (c == '\t') {
      out += "\\t";
    } else {
      out += c;
    }
  }
  return out + "\"";
}

std::string type_text(const Type& t) { return t.str(); }

void line(std::string& out, int indent, const std::string& text) {
  out.append(static_cast<std::size_t>(indent) * 2, ' ');
  out += text;
  out += '\n';
}

void stmt_text(std::string& out, const Stmt& s, int indent);

void block_body(std::string& out, const Block& b, int indent) {
  for (const auto& s : b) stmt_text(out, *s, indent);
}

void if_text(std::string& out, const Stmt& s, int indent, bool continued) {
  std::string head = (continued ? "} else if (" : "if (") + format_expr(*s.expr) + ") {";
  line(out, indent, head);
  block_body(out, s.body, indent + 1);
  if (s.orelse.size() == 1 && s.orelse[0]->kind == Stmt::Kind::If) {
    if_text(out, *s.orelse[0], indent, true);
    return;
  }
  if (!s.orelse.empty()) {
    line(out, indent, "} else {");
    block_body(out, s.orelse, indent + 1);
  }
  line(out, indent, "}");
}

void stmt_text(std::string& out, const Stmt& s, int indent) {
  switch (s.kind) {
    case Stmt::Kind::Let: line(out, indent, "let " + s.name + " = " + format_expr(*s.expr) + ";"); break;
    case Stmt::Kind::Assign: line(out, indent, format_expr(*s.target) + " <- " + format_expr(*s.expr) + ";"); break;
    case Stmt::Kind::Insert: line(out, indent, format_expr(*s.target) + " <= " + format_expr(*s.expr) + ";"); break;
    case Stmt::Kind::If: if_text(out, s, indent, false); break;
    case Stmt::Kind::Accum:
      line(out, indent, "accum " + type_text(s.acc_type) + " " + s.name + " with " + combinator_name(s.acc_comb) +
                            " over " + type_text(s.loop_type) + " " + s.loop_var + " from " + format_expr(*s.expr) +
                            " {");
      block_body(out, s.body, indent + 1);
      line(out, indent, "} in {");
      block_body(out, s.orelse, indent + 1);
      line(out, indent, "}");
      break;
    case Stmt::Kind::Wait: line(out, indent, "waitNextTick;"); break;
    case Stmt::Kind::Restart: line(out, indent, "restart;"); break;
    case Stmt::Kind::Atomic:
      line(out, indent, "atomic {");
      block_body(out, s.body, indent + 1);
      line(out, indent, "}");
      break;
    case Stmt::Kind::Spawn: {
      std::string t = "spawn " + s.spawn_class + "(";
      for (std::size_t i = 0; i < s.spawn_inits.size(); ++i) {
        if (i) t += ", ";
        t += s.spawn_inits[i].first + ": " + format_expr(*s.spawn_inits[i].second);
      }
      line(out, indent, t + ");");
      break;
    }
    case Stmt::Kind::Destroy: line(out, indent, "destroy " + format_expr(*s.expr) + ";"); break;
  }
}

}  // namespace

std::string format_expr(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Number: return number_text(e.num);
    case Expr::Kind::Int: return std::to_string(e.ival);
    case Expr::Kind::Bool: return e.bval ? "true" : "false";
    case Expr::Kind::String: return quote(e.text);
    case Expr::Kind::Null: return "null";
    case Expr::Kind::This: return "this";
    case Expr::Kind::Name: return e.text;
    case Expr::Kind::Field: {
      const Expr& obj = *e.args[0];
      std::string o = format_expr(obj);
      if (precedence(obj) < 8) o = "(" + o + ")";
      return o + "." + e.text;
    }
    case Expr::Kind::Unary: {
      const Expr& x = *e.args[0];
      std::string inner = format_expr(x);
      if (precedence(x) < 7) inner = "(" + inner + ")";
      // "- -x" must not fuse into a token; "-" followed by a negative literal is fine with a space
      std::string op = e.uop == UnOp::Not ? "!" : "-";
      if (!inner.empty() && (inner[0] == '-' )) op += " ";
      return op + inner;
    }
    case Expr::Kind::Binary: {
      int p = precedence(e);
      std::string l = format_expr(*e.args[0]);
      std::string r = format_expr(*e.args[1]);
      if (precedence(*e.args[0]) < p) l = "(" + l + ")";
      if (precedence(*e.args[1]) <= p) r = "(" + r + ")";
      return l + " " + binop_text(e.bop) + " " + r;
    }
    case Expr::Kind::Call: {
      std::string t = e.text + "(";
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        if (i) t += ", ";
        t += format_expr(*e.args[i]);
      }
      return t + ")";
    }
    case Expr::Kind::SetLit: {
      std::string t = "{";
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        if (i) t += ", ";
        t += format_expr(*e.args[i]);
      }
      return t + "}";
    }
  }
  return "?";
}

std::string format_block(const Block& b, int indent) {
  std::string out;
  block_body(out, b, indent);
  return out;
}

std::string format_ast(const CompilationUnit& u) {
  std::string out;
  auto sep = [&] {
    if (!out.empty()) out += '\n';
  };
  for (const auto& c : u.classes) {
    sep();
    line(out, 0, "class " + c.name + " {");
    line(out, 0, "state:");
    for (const auto& f : c.state) {
      line(out, 1, type_text(f.type) + " " + f.name + (f.init ? " = " + format_expr(*f.init) : "") + ";");
    }
    line(out, 0, "effects:");
    for (const auto& f : c.effects) {
      line(out, 1, type_text(f.type) + " " + f.name + " : " + combinator_name(f.comb) + ";");
    }
    if (!c.rules.empty()) {
      line(out, 0, "update:");
      for (const auto& r : c.rules) line(out, 1, r.field + " = " + format_expr(*r.expr) + ";");
    }
    if (!c.constraints.empty()) {
      line(out, 0, "constraints:");
      for (const auto& k : c.constraints) line(out, 1, format_expr(*k) + ";");
    }
    line(out, 0, "}");
  }
  for (const auto& s : u.scripts) {
    sep();
    line(out, 0, "run " + s.name + "(this: " + s.cls + ") {");
    block_body(out, s.body, 1);
    line(out, 0, "}");
  }
  for (const auto& h : u.handlers) {
    sep();
    line(out, 0, "on " + h.cls + " when (" + format_expr(*h.cond) + ")" + (h.may_restart ? " restart" : "") + " {");
    block_body(out, h.body, 1);
    line(out, 0, "}");
  }
  return out;
}

}  // namespace sgl
