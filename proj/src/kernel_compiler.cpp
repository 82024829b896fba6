/* Copyright 2026 The Offload Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "offload/error.hpp"
#include "offload/kernel.hpp"

#include <array>
#include <charconv>
#include <optional>
#include <unordered_map>
#include <unordered_set>

namespace offload::kernel {

  std::string_view to_string(ParamKind kind)
  {
    switch(kind) {
    case ParamKind::buffer_f64: return "buffer_f64";
    case ParamKind::buffer_u32: return "buffer_u32";
    case ParamKind::scalar_f64: return "scalar_f64";
    case ParamKind::scalar_u32: return "scalar_u32";
    }
    return "?";
  }

  std::string_view to_string(ValueType type)
  {
    switch(type) {
    case ValueType::f64: return "f64";
    case ValueType::u32: return "u32";
    case ValueType::boolean: return "bool";
    }
    return "?";
  }

  namespace {

    constexpr int max_nesting = 200;

    enum class Tok : std::uint8_t { ident, int_lit, float_lit, punct, end };

    struct Token {
      Tok kind;
      std::string_view text;
      int line;
      int col;
    };

    [[noreturn]] void fail(int line, int col, const std::string& message)
    {
      throw Error(Errc::compile_error, std::to_string(line) + ":" + std::to_string(col) + ": " + message);
    }

    bool is_ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
    bool is_digit(char c) { return c >= '0' && c <= '9'; }
    bool is_ident_char(char c) { return is_ident_start(c) || is_digit(c); }

    std::vector<Token> tokenize(std::string_view src)
    {
      static constexpr std::array<std::string_view, 10> two_char{"==", "!=", "<=", ">=", "&&",
                                                                  "||", "..", "//", "/*", "*/"};
      std::vector<Token> out;
      std::size_t i = 0;
      int line = 1, col = 1;
      auto advance = [&](std::size_t n) {
        for(std::size_t k = 0; k < n; k++) {
          if(src[i] == '\n') {
            line++;
            col = 1;
          } else {
            col++;
          }
          i++;
        }
      };
      while(i < src.size()) {
        char c = src[i];
        if(c == ' ' || c == '\t' || c == '\r' || c == '\n') {
          advance(1);
          continue;
        }
        if(c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
          while(i < src.size() && src[i] != '\n')
            advance(1);
          continue;
        }
        if(c == '/' && i + 1 < src.size() && src[i + 1] == '*') {
          int l = line, cl = col;
          advance(2);
          while(i + 1 < src.size() && !(src[i] == '*' && src[i + 1] == '/'))
            advance(1);
          if(i + 1 >= src.size())
            fail(l, cl, "unterminated comment");
          advance(2);
          continue;
        }
        int l = line, cl = col;
        std::size_t start = i;
        if(is_ident_start(c)) {
          while(i < src.size() && is_ident_char(src[i]))
            advance(1);
          out.push_back({Tok::ident, src.substr(start, i - start), l, cl});
          continue;
        }
        if(is_digit(c)) {
          bool is_float = false;
          while(i < src.size() && is_digit(src[i]))
            advance(1);
          if(i + 1 < src.size() && src[i] == '.' && is_digit(src[i + 1])) {
            is_float = true;
            advance(1);
            while(i < src.size() && is_digit(src[i]))
              advance(1);
          }
          if(i < src.size() && (src[i] == 'e' || src[i] == 'E')) {
            std::size_t j = i + 1;
            if(j < src.size() && (src[j] == '+' || src[j] == '-'))
              j++;
            if(j < src.size() && is_digit(src[j])) {
              is_float = true;
              advance(j - i);
              while(i < src.size() && is_digit(src[i]))
                advance(1);
            }
          }
          if(i < src.size() && is_ident_start(src[i]))
            fail(l, cl, "malformed number");
          out.push_back({is_float ? Tok::float_lit : Tok::int_lit, src.substr(start, i - start), l, cl});
          continue;
        }
        if(i + 1 < src.size()) {
          std::string_view two = src.substr(i, 2);
          bool matched = false;
          for(auto t : two_char)
            if(t == two)
              matched = true;
          if(matched) {
            if(two == "*/")
              fail(l, cl, "unexpected '*/'");
            advance(2);
            out.push_back({Tok::punct, two, l, cl});
            continue;
          }
        }
        static constexpr std::string_view singles = "(){}[],:;=<>+-*/%!.";
        if(singles.find(c) != std::string_view::npos) {
          advance(1);
          out.push_back({Tok::punct, src.substr(start, 1), l, cl});
          continue;
        }
        std::string shown;
        if(static_cast<unsigned char>(c) >= 0x20 && static_cast<unsigned char>(c) < 0x7f)
          shown = std::string("'") + c + "'";
        else {
          static constexpr char hex[] = "0123456789abcdef";
          unsigned char u = static_cast<unsigned char>(c);
          shown = std::string("byte 0x") + hex[u >> 4] + hex[u & 15];
        }
        fail(l, cl, "unexpected character " + shown);
      }
      out.push_back({Tok::end, {}, line, col});
      return out;
    }

    const std::unordered_set<std::string_view>& reserved_words()
    {
      static const std::unordered_set<std::string_view> words{
          "kernel", "let", "if", "else", "for", "in", "break",
          "gtid", "block_idx", "thread_idx", "grid_dim", "block_dim",
          "sin", "cos", "sqrt", "abs", "min", "max", "select", "f64", "u32"};
      return words;
    }

    std::optional<ParamKind> parse_kind(std::string_view s)
    {
      if(s == "buffer_f64") return ParamKind::buffer_f64;
      if(s == "buffer_u32") return ParamKind::buffer_u32;
      if(s == "scalar_f64") return ParamKind::scalar_f64;
      if(s == "scalar_u32") return ParamKind::scalar_u32;
      return std::nullopt;
    }

    std::optional<Builtin> parse_builtin(std::string_view s)
    {
      if(s == "gtid") return Builtin::gtid;
      if(s == "block_idx") return Builtin::block_idx;
      if(s == "thread_idx") return Builtin::thread_idx;
      if(s == "grid_dim") return Builtin::grid_dim;
      if(s == "block_dim") return Builtin::block_dim;
      return std::nullopt;
    }

    // result of checking one expression
    struct Typed {
      std::uint32_t node;
      ValueType type;
      bool int_literal = false;
    };

    struct Local {
      std::uint32_t slot;
      ValueType type;
      bool mutable_;
    };

    class Parser {
    public:
      explicit Parser(std::vector<Token> tokens)
        : toks_(std::move(tokens))
      {}

      std::vector<KernelIR> parse_program()
      {
        std::vector<KernelIR> kernels;
        std::unordered_set<std::string> names;
        while(peek().kind != Tok::end) {
          const Token& at = peek();
          KernelIR k = parse_kernel();
          if(!names.insert(k.name).second)
            fail(at.line, at.col, "duplicate kernel '" + k.name + "'");
          kernels.push_back(std::move(k));
        }
        if(kernels.empty())
          fail(peek().line, peek().col, "no kernel definitions");
        return kernels;
      }

    private:
      // ---------------------------------------------------------------- tokens

      const Token& peek(std::size_t ahead = 0) const
      {
        std::size_t i = std::min(pos_ + ahead, toks_.size() - 1);
        return toks_[i];
      }

      const Token& next()
      {
        const Token& t = toks_[pos_];
        if(pos_ + 1 < toks_.size())
          pos_++;
        return t;
      }

      bool is_punct(std::string_view p, std::size_t ahead = 0) const
      {
        const Token& t = peek(ahead);
        return t.kind == Tok::punct && t.text == p;
      }

      bool is_word(std::string_view w) const
      {
        const Token& t = peek();
        return t.kind == Tok::ident && t.text == w;
      }

      static std::string describe(const Token& t)
      {
        if(t.kind == Tok::end)
          return "end of input";
        return "'" + std::string(t.text) + "'";
      }

      const Token& expect_punct(std::string_view p)
      {
        if(!is_punct(p))
          fail(peek().line, peek().col, "expected '" + std::string(p) + "', found " + describe(peek()));
        return next();
      }

      void expect_word(std::string_view w)
      {
        if(!is_word(w))
          fail(peek().line, peek().col, "expected '" + std::string(w) + "', found " + describe(peek()));
        next();
      }

      const Token& expect_ident()
      {
        if(peek().kind != Tok::ident)
          fail(peek().line, peek().col, "expected identifier, found " + describe(peek()));
        return next();
      }

      const Token& expect_new_name()
      {
        const Token& t = expect_ident();
        if(reserved_words().count(t.text))
          fail(t.line, t.col, "'" + std::string(t.text) + "' is reserved");
        return t;
      }

      struct DepthGuard {
        DepthGuard(Parser& p, const Token& at)
          : p(p)
        {
          if(++p.depth_ > max_nesting)
            fail(at.line, at.col, "nesting too deep");
        }
        ~DepthGuard() { p.depth_--; }
        Parser& p;
      };

      // ----------------------------------------------------------- structure

      KernelIR parse_kernel()
      {
        expect_word("kernel");
        const Token& name = expect_new_name();
        ir_ = KernelIR{};
        ir_.name = std::string(name.text);
        scopes_.clear();
        param_index_.clear();
        loop_depth_ = 0;

        expect_punct("(");
        if(!is_punct(")")) {
          for(;;) {
            const Token& pname = expect_new_name();
            expect_punct(":");
            const Token& kind_tok = expect_ident();
            auto kind = parse_kind(kind_tok.text);
            if(!kind)
              fail(kind_tok.line, kind_tok.col, "unknown parameter kind '" + std::string(kind_tok.text) + "'");
            if(param_index_.count(std::string(pname.text)))
              fail(pname.line, pname.col, "duplicate parameter '" + std::string(pname.text) + "'");
            param_index_[std::string(pname.text)] = std::uint32_t(ir_.params.size());
            ir_.params.push_back(Param{std::string(pname.text), *kind});
            if(is_punct(","))
              next();
            else
              break;
          }
        }
        expect_punct(")");
        ir_.body = parse_block();
        return std::move(ir_);
      }

      std::vector<Stmt> parse_block()
      {
        DepthGuard guard(*this, peek());
        expect_punct("{");
        scopes_.emplace_back();
        std::vector<Stmt> stmts;
        while(!is_punct("}")) {
          if(peek().kind == Tok::end)
            fail(peek().line, peek().col, "expected '}', found end of input");
          stmts.push_back(parse_stmt());
        }
        next();
        scopes_.pop_back();
        return stmts;
      }

      Stmt parse_stmt()
      {
        const Token& t = peek();
        if(t.kind != Tok::ident)
          fail(t.line, t.col, "expected statement, found " + describe(t));
        if(t.text == "let")
          return parse_let();
        if(t.text == "if")
          return parse_if();
        if(t.text == "for")
          return parse_for();
        if(t.text == "break")
          return parse_break();
        if(is_punct("[", 1))
          return parse_store();
        return parse_assign();
      }

      Stmt parse_let()
      {
        next();
        const Token& name = expect_new_name();
        expect_punct("=");
        Typed value = parse_expr();
        expect_punct(";");
        auto& scope = scopes_.back();
        if(scope.count(std::string(name.text)))
          fail(name.line, name.col, "'" + std::string(name.text) + "' already declared in this scope");
        if(param_index_.count(std::string(name.text)))
          fail(name.line, name.col, "'" + std::string(name.text) + "' shadows a parameter");
        std::uint32_t slot = ir_.slot_count++;
        scope[std::string(name.text)] = Local{slot, value.type, true};
        Stmt s{Stmt::Kind::let};
        s.target = slot;
        s.expr = value.node;
        return s;
      }

      Stmt parse_assign()
      {
        const Token& name = next();
        const Local* local = find_local(name.text);
        if(!local) {
          if(param_index_.count(std::string(name.text)))
            fail(name.line, name.col, "cannot assign to parameter '" + std::string(name.text) + "'");
          if(parse_builtin(name.text))
            fail(name.line, name.col, "cannot assign to builtin '" + std::string(name.text) + "'");
          fail(name.line, name.col, "unknown identifier '" + std::string(name.text) + "'");
        }
        if(!local->mutable_)
          fail(name.line, name.col, "cannot assign to loop variable '" + std::string(name.text) + "'");
        Local target = *local;
        const Token& eq = expect_punct("=");
        Typed value = parse_expr();
        require_type(value, target.type, eq);
        expect_punct(";");
        Stmt s{Stmt::Kind::assign};
        s.target = target.slot;
        s.expr = value.node;
        return s;
      }

      Stmt parse_store()
      {
        const Token& name = next();
        std::uint32_t param = buffer_param(name);
        expect_punct("[");
        const Token& idx_tok = peek();
        Typed index = parse_expr();
        require_type(index, ValueType::u32, idx_tok);
        expect_punct("]");
        const Token& eq = expect_punct("=");
        Typed value = parse_expr();
        require_type(value, element_type(ir_.params[param].kind), eq);
        expect_punct(";");
        Stmt s{Stmt::Kind::store};
        s.target = param;
        s.index = index.node;
        s.expr = value.node;
        return s;
      }

      Stmt parse_if()
      {
        const Token& kw = next();
        DepthGuard guard(*this, kw);
        expect_punct("(");
        const Token& at = peek();
        Typed cond = parse_expr();
        require_type(cond, ValueType::boolean, at);
        expect_punct(")");
        Stmt s{Stmt::Kind::branch};
        s.expr = cond.node;
        s.body = parse_block();
        if(is_word("else")) {
          next();
          if(is_word("if"))
            s.orelse.push_back(parse_if());
          else
            s.orelse = parse_block();
        }
        return s;
      }

      Stmt parse_for()
      {
        next();
        const Token& var = expect_new_name();
        expect_word("in");
        const Token& lower = peek();
        if(lower.kind != Tok::int_lit || lower.text != "0")
          fail(lower.line, lower.col, "loop lower bound must be 0");
        next();
        expect_punct("..");
        const Token& at = peek();
        Typed bound = parse_expr();
        require_type(bound, ValueType::u32, at);

        std::uint32_t slot = ir_.slot_count++;
        // the loop variable lives in its own scope around the body
        scopes_.emplace_back();
        scopes_.back()[std::string(var.text)] = Local{slot, ValueType::u32, false};
        loop_depth_++;
        Stmt s{Stmt::Kind::loop};
        s.target = slot;
        s.expr = bound.node;
        s.body = parse_block();
        loop_depth_--;
        scopes_.pop_back();
        return s;
      }

      Stmt parse_break()
      {
        const Token& kw = next();
        if(loop_depth_ == 0)
          fail(kw.line, kw.col, "'break' outside of a loop");
        expect_word("if");
        expect_punct("(");
        const Token& at = peek();
        Typed cond = parse_expr();
        require_type(cond, ValueType::boolean, at);
        expect_punct(")");
        expect_punct(";");
        Stmt s{Stmt::Kind::break_if};
        s.expr = cond.node;
        return s;
      }

      // --------------------------------------------------------- expressions

      Typed parse_expr()
      {
        DepthGuard guard(*this, peek());
        return parse_or();
      }

      Typed parse_or()
      {
        Typed lhs = parse_and();
        while(is_punct("||")) {
          const Token& op = next();
          Typed rhs = parse_and();
          require_type(lhs, ValueType::boolean, op);
          require_type(rhs, ValueType::boolean, op);
          lhs = emit(Op::logical_or, ValueType::boolean, lhs.node, rhs.node);
        }
        return lhs;
      }

      Typed parse_and()
      {
        Typed lhs = parse_cmp();
        while(is_punct("&&")) {
          const Token& op = next();
          Typed rhs = parse_cmp();
          require_type(lhs, ValueType::boolean, op);
          require_type(rhs, ValueType::boolean, op);
          lhs = emit(Op::logical_and, ValueType::boolean, lhs.node, rhs.node);
        }
        return lhs;
      }

      Typed parse_cmp()
      {
        Typed lhs = parse_add();
        static constexpr std::array<std::string_view, 6> ops{"<", "<=", ">", ">=", "==", "!="};
        for(;;) {
          std::size_t which = ops.size();
          for(std::size_t k = 0; k < ops.size(); k++)
            if(is_punct(ops[k]))
              which = k;
          if(which == ops.size())
            return lhs;
          const Token& op = next();
          Typed rhs = parse_add();
          ValueType t = unify(lhs, rhs, op);
          Op code;
          if(t == ValueType::f64)
            code = std::array{Op::lt_f64, Op::le_f64, Op::gt_f64, Op::ge_f64, Op::eq_f64, Op::ne_f64}[which];
          else if(t == ValueType::u32)
            code = std::array{Op::lt_u32, Op::le_u32, Op::gt_u32, Op::ge_u32, Op::eq_u32, Op::ne_u32}[which];
          else if(which == 4)
            code = Op::eq_bool;
          else if(which == 5)
            code = Op::ne_bool;
          else
            fail(op.line, op.col, "operator '" + std::string(op.text) + "' is not defined for bool");
          lhs = emit(code, ValueType::boolean, lhs.node, rhs.node);
        }
      }

      Typed parse_add()
      {
        Typed lhs = parse_mul();
        while(is_punct("+") || is_punct("-")) {
          const Token& op = next();
          Typed rhs = parse_mul();
          ValueType t = unify(lhs, rhs, op);
          bool add = op.text == "+";
          if(t == ValueType::f64)
            lhs = emit(add ? Op::add_f64 : Op::sub_f64, t, lhs.node, rhs.node);
          else if(t == ValueType::u32)
            lhs = emit(add ? Op::add_u32 : Op::sub_u32, t, lhs.node, rhs.node);
          else
            fail(op.line, op.col, "arithmetic on bool");
        }
        return lhs;
      }

      Typed parse_mul()
      {
        Typed lhs = parse_unary();
        while(is_punct("*") || is_punct("/") || is_punct("%")) {
          const Token& op = next();
          Typed rhs = parse_unary();
          ValueType t = unify(lhs, rhs, op);
          if(t == ValueType::boolean)
            fail(op.line, op.col, "arithmetic on bool");
          if(op.text == "%") {
            if(t != ValueType::u32)
              fail(op.line, op.col, "'%' requires u32 operands");
            lhs = emit(Op::mod_u32, t, lhs.node, rhs.node);
          } else if(op.text == "*") {
            lhs = emit(t == ValueType::f64 ? Op::mul_f64 : Op::mul_u32, t, lhs.node, rhs.node);
          } else {
            lhs = emit(t == ValueType::f64 ? Op::div_f64 : Op::div_u32, t, lhs.node, rhs.node);
          }
        }
        return lhs;
      }

      Typed parse_unary()
      {
        if(is_punct("-")) {
          const Token& op = next();
          DepthGuard guard(*this, op);
          Typed v = parse_unary();
          require_type(v, ValueType::f64, op);
          return emit(Op::neg_f64, ValueType::f64, v.node);
        }
        if(is_punct("!")) {
          const Token& op = next();
          DepthGuard guard(*this, op);
          Typed v = parse_unary();
          require_type(v, ValueType::boolean, op);
          return emit(Op::logical_not, ValueType::boolean, v.node);
        }
        return parse_primary();
      }

      Typed parse_primary()
      {
        const Token& t = peek();
        if(t.kind == Tok::int_lit) {
          next();
          std::uint64_t v = 0;
          auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
          if(ec != std::errc() || v > 0xffffffffull)
            fail(t.line, t.col, "integer literal out of range");
          Node n{Op::const_value, ValueType::u32};
          n.imm.u = std::uint32_t(v);
          Typed r = push(n);
          r.int_literal = true;
          return r;
        }
        if(t.kind == Tok::float_lit) {
          next();
          double v = 0;
          auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
          if(ec != std::errc())
            fail(t.line, t.col, "invalid floating-point literal");
          Node n{Op::const_value, ValueType::f64};
          n.imm.f = v;
          return push(n);
        }
        if(is_punct("(")) {
          next();
          Typed inner = parse_expr();
          expect_punct(")");
          return inner;
        }
        if(t.kind != Tok::ident)
          fail(t.line, t.col, "expected expression, found " + describe(t));

        next();
        if(is_punct("("))
          return parse_call(t);
        if(is_punct("["))
          return parse_load(t);
        if(auto b = parse_builtin(t.text))
          return parse_builtin_ref(t, *b);
        if(const Local* local = find_local(t.text)) {
          Node n{Op::local, local->type};
          n.a = local->slot;
          return push(n);
        }
        auto it = param_index_.find(std::string(t.text));
        if(it != param_index_.end()) {
          ParamKind k = ir_.params[it->second].kind;
          if(is_buffer(k))
            fail(t.line, t.col, "buffer '" + std::string(t.text) + "' must be indexed");
          Node n{Op::param, k == ParamKind::scalar_f64 ? ValueType::f64 : ValueType::u32};
          n.a = it->second;
          return push(n);
        }
        fail(t.line, t.col, "unknown identifier '" + std::string(t.text) + "'");
      }

      Typed parse_builtin_ref(const Token&, Builtin b)
      {
        std::uint32_t component = 0;
        if(is_punct(".")) {
          next();
          const Token& c = expect_ident();
          if(b == Builtin::gtid)
            fail(c.line, c.col, "'gtid' has no components");
          if(c.text == "x")
            component = 0;
          else if(c.text == "y")
            component = 1;
          else if(c.text == "z")
            component = 2;
          else
            fail(c.line, c.col, "unknown component '" + std::string(c.text) + "'");
        }
        Node n{Op::builtin, ValueType::u32};
        n.a = std::uint32_t(b);
        n.b = component;
        return push(n);
      }

      Typed parse_load(const Token& name)
      {
        std::uint32_t param = buffer_param(name);
        next();
        const Token& at = peek();
        Typed index = parse_expr();
        require_type(index, ValueType::u32, at);
        expect_punct("]");
        bool f = ir_.params[param].kind == ParamKind::buffer_f64;
        Node n{f ? Op::load_f64 : Op::load_u32, f ? ValueType::f64 : ValueType::u32};
        n.a = param;
        n.b = index.node;
        return push(n);
      }

      Typed parse_call(const Token& fn)
      {
        next(); // (
        std::vector<Typed> args;
        std::vector<const Token*> arg_tokens;
        if(!is_punct(")")) {
          for(;;) {
            arg_tokens.push_back(&peek());
            args.push_back(parse_expr());
            if(is_punct(","))
              next();
            else
              break;
          }
        }
        expect_punct(")");
        std::string_view name = fn.text;
        auto arity = [&](std::size_t n) {
          if(args.size() != n)
            fail(fn.line, fn.col, "'" + std::string(name) + "' expects " + std::to_string(n) + " argument" +
                                      (n == 1 ? "" : "s") + ", got " + std::to_string(args.size()));
        };
        if(name == "sin" || name == "cos" || name == "sqrt") {
          arity(1);
          require_type(args[0], ValueType::f64, *arg_tokens[0]);
          Op op = name == "sin" ? Op::sin : name == "cos" ? Op::cos : Op::sqrt;
          return emit(op, ValueType::f64, args[0].node);
        }
        if(name == "abs") {
          arity(1);
          if(args[0].int_literal || args[0].type == ValueType::u32)
            return Typed{args[0].node, ValueType::u32};
          require_type(args[0], ValueType::f64, *arg_tokens[0]);
          return emit(Op::abs_f64, ValueType::f64, args[0].node);
        }
        if(name == "min" || name == "max") {
          arity(2);
          ValueType t = unify(args[0], args[1], fn);
          bool mn = name == "min";
          if(t == ValueType::f64)
            return emit(mn ? Op::min_f64 : Op::max_f64, t, args[0].node, args[1].node);
          if(t == ValueType::u32)
            return emit(mn ? Op::min_u32 : Op::max_u32, t, args[0].node, args[1].node);
          fail(fn.line, fn.col, "'" + std::string(name) + "' is not defined for bool");
        }
        if(name == "select") {
          arity(3);
          require_type(args[0], ValueType::boolean, *arg_tokens[0]);
          ValueType t = unify(args[1], args[2], fn);
          return emit(Op::select, t, args[0].node, args[1].node, args[2].node);
        }
        if(name == "f64") {
          arity(1);
          if(args[0].int_literal) {
            coerce(args[0]);
            return Typed{args[0].node, ValueType::f64};
          }
          if(args[0].type == ValueType::f64)
            return args[0];
          if(args[0].type == ValueType::u32)
            return emit(Op::u32_to_f64, ValueType::f64, args[0].node);
          fail(arg_tokens[0]->line, arg_tokens[0]->col, "cannot convert bool to f64");
        }
        if(name == "u32") {
          arity(1);
          if(args[0].type == ValueType::u32)
            return Typed{args[0].node, ValueType::u32};
          if(args[0].type == ValueType::f64)
            return emit(Op::f64_to_u32, ValueType::u32, args[0].node);
          fail(arg_tokens[0]->line, arg_tokens[0]->col, "cannot convert bool to u32");
        }
        fail(fn.line, fn.col, "unknown function '" + std::string(name) + "'");
      }

      // ------------------------------------------------------------- helpers

      std::uint32_t buffer_param(const Token& name)
      {
        auto it = param_index_.find(std::string(name.text));
        if(it == param_index_.end()) {
          if(find_local(name.text))
            fail(name.line, name.col, "'" + std::string(name.text) + "' is not a buffer");
          fail(name.line, name.col, "unknown identifier '" + std::string(name.text) + "'");
        }
        if(!is_buffer(ir_.params[it->second].kind))
          fail(name.line, name.col, "'" + std::string(name.text) + "' is not a buffer");
        return it->second;
      }

      static ValueType element_type(ParamKind k)
      {
        return k == ParamKind::buffer_f64 ? ValueType::f64 : ValueType::u32;
      }

      const Local* find_local(std::string_view name) const
      {
        for(auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
          auto f = it->find(std::string(name));
          if(f != it->end())
            return &f->second;
        }
        return nullptr;
      }

      void coerce(Typed& v)
      {
        Node& n = ir_.nodes[v.node];
        n.type = ValueType::f64;
        n.imm.f = double(n.imm.u);
        v.type = ValueType::f64;
        v.int_literal = false;
      }

      void require_type(Typed& v, ValueType want, const Token& at)
      {
        if(v.type == want)
          return;
        if(want == ValueType::f64 && v.int_literal) {
          coerce(v);
          return;
        }
        fail(at.line, at.col,
             "type mismatch: expected " + std::string(to_string(want)) + ", found " + std::string(to_string(v.type)));
      }

      // common operand type of a binary operator
      ValueType unify(Typed& lhs, Typed& rhs, const Token& at)
      {
        if(lhs.type == rhs.type)
          return lhs.type;
        if(lhs.type == ValueType::f64 && rhs.int_literal) {
          coerce(rhs);
          return ValueType::f64;
        }
        if(rhs.type == ValueType::f64 && lhs.int_literal) {
          coerce(lhs);
          return ValueType::f64;
        }
        fail(at.line, at.col,
             "type mismatch: " + std::string(to_string(lhs.type)) + " and " + std::string(to_string(rhs.type)));
      }

      Typed push(const Node& n)
      {
        ir_.nodes.push_back(n);
        return Typed{std::uint32_t(ir_.nodes.size() - 1), n.type};
      }

      Typed emit(Op op, ValueType type, std::uint32_t a, std::uint32_t b = 0, std::uint32_t c = 0)
      {
        Node n{op, type};
        n.a = a;
        n.b = b;
        n.c = c;
        return push(n);
      }

      std::vector<Token> toks_;
      std::size_t pos_ = 0;
      int depth_ = 0;
      int loop_depth_ = 0;
      KernelIR ir_;
      std::vector<std::unordered_map<std::string, Local>> scopes_;
      std::unordered_map<std::string, std::uint32_t> param_index_;
    };

  }; // namespace

  std::vector<KernelIR> compile(std::string_view source)
  {
    Parser parser(tokenize(source));
    return parser.parse_program();
  }

  KernelIR compile_kernel(std::string_view source, std::string_view name)
  {
    for(auto& k : compile(source))
      if(k.name == name)
        return std::move(k);
    throw Error(Errc::compile_error, "kernel '" + std::string(name) + "' not found");
  }

}; // namespace offload::kernel
