#include "jwbinder/oracle/eval.hpp"

#include <cmath>
#include <cstring>
#include <unordered_map>

#include "jwbinder/js/printer.hpp"

namespace jwbinder::oracle {

using js::Ast;
using js::kNoNode;
using js::NodeId;
using js::NodeKind;
using ssr::JsFragment;
using wasm::Op;
using wasm::ValType;

namespace {

constexpr size_t kPageSize = 65536;

struct EvalError {
  std::string message;
};

// Runtime value: plain value, a declared function, or a host binding.
struct EvalValue {
  enum Kind { Plain, Func, Host } kind = Plain;
  Value value;
  NodeId func_decl = kNoNode;
  const HostStub* host = nullptr;

  static EvalValue of(Value v) { return {Plain, v, kNoNode, nullptr}; }
};

struct Signal {
  enum Kind { Normal, BreakLoop, ContinueLoop, ReturnSig } kind = Normal;
  std::string label;
  std::optional<EvalValue> value;  // returns can carry function references
};

class Evaluator {
 public:
  Evaluator(const JsFragment& frag, EvalBindings& bindings, uint64_t fuel)
      : frag_(frag), ast_(frag.ast), bindings_(bindings), fuel_(fuel) {}

  EvalOutcome run(const std::vector<Value>& args) {
    EvalOutcome outcome;
    try {
      bind_params(args);
      hoist_functions();
      Signal sig = Signal{};
      const js::Node& program = ast_.node(ast_.root());
      for (NodeId stmt : program.children) {
        sig = exec(stmt);
        if (sig.kind != Signal::Normal) break;
      }
      if (sig.kind == Signal::ReturnSig) {
        if (sig.value) outcome.result.value = plain(*sig.value, "fragment result");
      } else if (frag_.result_expr != kNoNode) {
        outcome.result.value = plain(eval(frag_.result_expr), "result expression");
      }
    } catch (const EvalTrap& trap) {
      outcome.result.trap = trap.kind;
    } catch (const EvalError& err) {
      outcome.error = err.message;
    }
    outcome.result.trace = std::move(trace_);
    return outcome;
  }

 private:
  void bind_params(const std::vector<Value>& args) {
    for (size_t i = 0; i < frag_.param_names.size(); ++i) {
      Value v = i < args.size()
                    ? args[i]
                    : Value::zero_of(i < frag_.param_types.size() ? frag_.param_types[i]
                                                                  : ValType::I32);
      env_[frag_.param_names[i]] = EvalValue::of(v);
    }
  }

  void hoist_functions() {
    const js::Node& program = ast_.node(ast_.root());
    for (NodeId stmt : program.children) {
      const js::Node& n = ast_.node(stmt);
      if (n.kind == NodeKind::FunctionDeclaration) {
        EvalValue fn;
        fn.kind = EvalValue::Func;
        fn.func_decl = stmt;
        env_[ast_.node(n.children[0]).text] = fn;
      }
    }
  }

  void burn(uint64_t n = 1) {
    if (fuel_ < n) throw EvalTrap{TrapKind::Fuel};
    fuel_ -= n;
  }

  [[noreturn]] void fail(const std::string& message) { throw EvalError{message}; }

  Value plain(const EvalValue& v, const char* what) {
    if (v.kind != EvalValue::Plain) fail(std::string("expected a value for ") + what);
    return v.value;
  }

  const ssr::TypeTag* tag_of(NodeId id) const {
    auto it = frag_.tags.find(id);
    return it == frag_.tags.end() ? nullptr : &it->second;
  }

  const std::string& printed(NodeId id) {
    auto it = print_cache_.find(id);
    if (it != print_cache_.end()) return it->second;
    return print_cache_.emplace(id, js::print_expression(ast_, id)).first->second;
  }

  // ---- environment ----

  EvalValue* lookup(const std::string& name) {
    auto it = env_.find(name);
    return it == env_.end() ? nullptr : &it->second;
  }

  // Function activations shadow and restore names they bind.
  struct Frame {
    Evaluator& self;
    std::vector<std::pair<std::string, std::optional<EvalValue>>> saved;
    explicit Frame(Evaluator& s) : self(s) {}
    void bind(const std::string& name, EvalValue v) {
      auto it = self.env_.find(name);
      saved.emplace_back(name, it == self.env_.end() ? std::nullopt
                                                     : std::make_optional(it->second));
      self.env_[name] = std::move(v);
    }
    ~Frame() {
      for (auto rit = saved.rbegin(); rit != saved.rend(); ++rit) {
        if (rit->second) {
          self.env_[rit->first] = *rit->second;
        } else {
          self.env_.erase(rit->first);
        }
      }
    }
  };

  // ---- memory ----

  std::vector<uint8_t>& memory() {
    if (!bindings_.memory) fail("memory access without a bound memory image");
    return *bindings_.memory;
  }

  uint64_t mem_index(NodeId index_expr) {
    Value v = plain(eval(index_expr), "memory index");
    return static_cast<uint64_t>(static_cast<uint32_t>(v.i32));
  }

  Value mem_load(Op op, uint64_t addr) {
    auto& mem = memory();
    auto rd = [&](size_t width) {
      if (addr + width > mem.size()) throw EvalTrap{TrapKind::OobMemory};
      uint64_t v = 0;
      for (size_t i = 0; i < width; ++i) v |= static_cast<uint64_t>(mem[addr + i]) << (8 * i);
      return v;
    };
    switch (op) {
      case Op::I32Load: return Value::make_i32(static_cast<int32_t>(rd(4)));
      case Op::I64Load: return Value::make_i64(static_cast<int64_t>(rd(8)));
      case Op::F32Load: {
        uint32_t bits = static_cast<uint32_t>(rd(4));
        float f;
        std::memcpy(&f, &bits, 4);
        return Value::make_f32(f);
      }
      case Op::F64Load: {
        uint64_t bits = rd(8);
        double f;
        std::memcpy(&f, &bits, 8);
        return Value::make_f64(f);
      }
      case Op::I32Load8S: return Value::make_i32(static_cast<int8_t>(rd(1)));
      case Op::I32Load8U: return Value::make_i32(static_cast<int32_t>(rd(1)));
      case Op::I32Load16S: return Value::make_i32(static_cast<int16_t>(rd(2)));
      case Op::I32Load16U: return Value::make_i32(static_cast<int32_t>(rd(2)));
      case Op::I64Load8S: return Value::make_i64(static_cast<int8_t>(rd(1)));
      case Op::I64Load8U: return Value::make_i64(static_cast<int64_t>(rd(1)));
      case Op::I64Load16S: return Value::make_i64(static_cast<int16_t>(rd(2)));
      case Op::I64Load16U: return Value::make_i64(static_cast<int64_t>(rd(2)));
      case Op::I64Load32S: return Value::make_i64(static_cast<int32_t>(rd(4)));
      case Op::I64Load32U: return Value::make_i64(static_cast<int64_t>(rd(4)));
      default: fail("bad load tag");
    }
  }

  void mem_store(Op op, uint64_t addr, const Value& v) {
    auto& mem = memory();
    auto wr = [&](size_t width, uint64_t bits) {
      if (addr + width > mem.size()) throw EvalTrap{TrapKind::OobMemory};
      for (size_t i = 0; i < width; ++i) mem[addr + i] = static_cast<uint8_t>(bits >> (8 * i));
    };
    switch (op) {
      case Op::I32Store: wr(4, static_cast<uint32_t>(v.i32)); break;
      case Op::I64Store: wr(8, static_cast<uint64_t>(v.i64)); break;
      case Op::F32Store: {
        uint32_t bits;
        std::memcpy(&bits, &v.f32, 4);
        wr(4, bits);
        break;
      }
      case Op::F64Store: {
        uint64_t bits;
        std::memcpy(&bits, &v.f64, 8);
        wr(8, bits);
        break;
      }
      case Op::I32Store8: wr(1, static_cast<uint32_t>(v.i32)); break;
      case Op::I32Store16: wr(2, static_cast<uint32_t>(v.i32)); break;
      case Op::I64Store8: wr(1, static_cast<uint64_t>(v.i64)); break;
      case Op::I64Store16: wr(2, static_cast<uint64_t>(v.i64)); break;
      case Op::I64Store32: wr(4, static_cast<uint64_t>(v.i64)); break;
      default: fail("bad store tag");
    }
  }

  // ---- tagged semantics ----

  // Bare literals evaluate as f64; a tagged operator expecting an integer
  // coerces them back (exact integral values only).
  Value coerce(const Value& v, ValType target) {
    if (v.type == target) return v;
    if (v.type == ValType::F64) {
      double d = v.f64;
      if (target == ValType::I32 && std::trunc(d) == d && d >= -2147483648.0 &&
          d <= 4294967295.0) {
        return Value::make_i32(static_cast<int32_t>(static_cast<int64_t>(d)));
      }
      if (target == ValType::I64 && std::trunc(d) == d) {
        return Value::make_i64(static_cast<int64_t>(d));
      }
      if (target == ValType::F32) return Value::make_f32(static_cast<float>(d));
    }
    fail("operand type mismatch: have " + std::string(wasm::valtype_name(v.type)) +
         ", tag wants " + wasm::valtype_name(target));
  }

  Value literal_value(NodeId id) {
    const js::Node& n = ast_.node(id);
    if (n.kind == NodeKind::NumberLiteral) return Value::make_f64(n.num);
    if (n.kind == NodeKind::UnaryExpression && n.text == "-") {
      return Value::make_f64(-ast_.node(n.children[0]).num);
    }
    fail("expected a literal");
  }

  Value const_of(const ssr::TypeTag& tag, NodeId node) {
    const js::Node& n = ast_.node(node);
    switch (tag.op) {
      case Op::I32Const:
        return Value::make_i32(static_cast<int32_t>(
            static_cast<int64_t>(literal_value(node).f64)));
      case Op::I64Const: {
        if (n.kind == NodeKind::CallExpression) {
          // i64("...") keeps values beyond 2^53 exact.
          const js::Node& arg = ast_.node(n.children[1]);
          return Value::make_i64(std::strtoll(arg.text.c_str(), nullptr, 10));
        }
        return Value::make_i64(static_cast<int64_t>(literal_value(node).f64));
      }
      case Op::F32Const:
        return Value::make_f32(static_cast<float>(literal_value(node).f64));
      case Op::F64Const:
        return Value::make_f64(literal_value(node).f64);
      default:
        fail("bad const tag");
    }
  }

  Value apply_tagged(const ssr::TypeTag& tag, NodeId node) {
    const js::Node& n = ast_.node(node);
    switch (tag.op) {
      case Op::I32Const: case Op::I64Const: case Op::F32Const: case Op::F64Const:
        return const_of(tag, node);
      case Op::MemorySize:
        return Value::make_i32(static_cast<int32_t>(memory().size() / kPageSize));
      case Op::MemoryGrow: {
        Value grow = plain(eval(n.children[1]), "memory.grow operand");
        auto& mem = memory();
        uint64_t current = mem.size() / kPageSize;
        uint64_t want = current + static_cast<uint32_t>(grow.i32);
        if (grow.i32 < 0 || want > bindings_.max_pages) return Value::make_i32(-1);
        mem.resize(want * kPageSize, 0);
        return Value::make_i32(static_cast<int32_t>(current));
      }
      default:
        break;
    }
    if (auto lr = [&] {
          switch (tag.op) {
            case Op::I32Load: case Op::I64Load: case Op::F32Load: case Op::F64Load:
            case Op::I32Load8S: case Op::I32Load8U: case Op::I32Load16S: case Op::I32Load16U:
            case Op::I64Load8S: case Op::I64Load8U: case Op::I64Load16S: case Op::I64Load16U:
            case Op::I64Load32S: case Op::I64Load32U:
              return true;
            default:
              return false;
          }
        }()) {
      (void)lr;
      return mem_load(tag.op, mem_index(n.children[1]));
    }

    auto sig = wasm::value_op_signature(tag.op);
    if (!sig) fail(std::string("unsupported tag ") + wasm::mnemonic(tag.op));
    std::vector<Value> operands;
    if (n.kind == NodeKind::BinaryExpression) {
      operands.push_back(plain(eval(n.children[0]), "operand"));
      if (sig->params.size() > 1) operands.push_back(plain(eval(n.children[1]), "operand"));
    } else if (n.kind == NodeKind::UnaryExpression) {
      operands.push_back(plain(eval(n.children[0]), "operand"));
    } else if (n.kind == NodeKind::CallExpression) {
      for (size_t i = 1; i < n.children.size(); ++i) {
        operands.push_back(plain(eval(n.children[i]), "operand"));
      }
    } else {
      fail("tagged node has unexpected shape");
    }
    for (size_t i = 0; i < operands.size() && i < sig->params.size(); ++i) {
      operands[i] = coerce(operands[i], sig->params[i]);
    }
    // Emitted text and tag must agree; a divergence means the abstraction
    // printed one operation but meant another.
    if (n.kind == NodeKind::BinaryExpression) check_text_matches(tag.op, n.text);
    return apply_value_op(tag.op, operands);
  }

  void check_text_matches(Op op, const std::string& text) {
    static const std::unordered_map<std::string, std::string> family = {
        {"+", "add"}, {"-", "sub"}, {"*", "mul"}, {"/", "div"}, {"%", "rem"},
        {"&", "and"}, {"|", "or"}, {"^", "xor"}, {"<<", "shl"}, {">>", "shr"},
        {"===", "eq"}, {"!==", "ne"}, {"<", "lt"}, {">", "gt"}, {"<=", "le"}, {">=", "ge"},
    };
    auto it = family.find(text);
    if (it == family.end()) fail("unexpected operator text " + text);
    std::string m = wasm::mnemonic(op);
    if (op == Op::I32Eqz || op == Op::I64Eqz) {
      if (text != "===") fail("eqz printed as " + text);
      return;
    }
    if (m.find(it->second) == std::string::npos) {
      fail("operator text '" + text + "' does not match " + m);
    }
  }

  // ---- expressions ----

  EvalValue eval(NodeId id) {
    burn();
    const js::Node& n = ast_.node(id);
    if (const ssr::TypeTag* tag = tag_of(id)) return EvalValue::of(apply_tagged(*tag, id));

    switch (n.kind) {
      case NodeKind::Identifier: {
        if (EvalValue* v = lookup(n.text)) return *v;
        auto host = bindings_.host.find(n.text);
        if (host != bindings_.host.end()) {
          EvalValue hv;
          hv.kind = EvalValue::Host;
          hv.host = &host->second;
          return hv;
        }
        fail("unbound identifier " + n.text);
      }
      case NodeKind::NumberLiteral:
        return EvalValue::of(Value::make_f64(n.num));
      case NodeKind::ConditionalExpression: {
        Value test = plain(eval(n.children[0]), "condition");
        return eval(test.truthy() ? n.children[1] : n.children[2]);
      }
      case NodeKind::BinaryExpression: {
        // Untagged comparisons appear in dispatch stubs; numeric compare.
        Value l = plain(eval(n.children[0]), "operand");
        Value r = plain(eval(n.children[1]), "operand");
        double a = l.as_double(), b = r.as_double();
        if (n.text == "===") return EvalValue::of(Value::make_i32(a == b));
        if (n.text == "!==") return EvalValue::of(Value::make_i32(a != b));
        if (n.text == "<") return EvalValue::of(Value::make_i32(a < b));
        if (n.text == ">") return EvalValue::of(Value::make_i32(a > b));
        if (n.text == "<=") return EvalValue::of(Value::make_i32(a <= b));
        if (n.text == ">=") return EvalValue::of(Value::make_i32(a >= b));
        fail("untagged operator " + n.text);
      }
      case NodeKind::MemberExpression: {
        // A member expression as a value is a host reference.
        auto host = bindings_.host.find(printed(id));
        if (host != bindings_.host.end()) {
          EvalValue hv;
          hv.kind = EvalValue::Host;
          hv.host = &host->second;
          return hv;
        }
        fail("unbound member expression " + printed(id));
      }
      case NodeKind::CallExpression:
        return eval_call(id);
      default:
        fail(std::string("unsupported expression: ") + js::node_kind_name(n.kind));
    }
  }

  EvalValue eval_call(NodeId id) {
    const js::Node& n = ast_.node(id);
    NodeId callee = n.children[0];
    const js::Node& c = ast_.node(callee);

    EvalValue target;
    if (c.kind == NodeKind::Identifier || c.kind == NodeKind::MemberExpression ||
        c.kind == NodeKind::CallExpression) {
      target = eval(callee);
    } else {
      fail("unsupported callee");
    }

    std::vector<Value> args;
    for (size_t i = 1; i < n.children.size(); ++i) {
      args.push_back(plain(eval(n.children[i]), "argument"));
    }

    if (target.kind == EvalValue::Host) {
      trace_.calls.push_back({target.host->label, args});
      Value v = target.host->invoke(host_ordinal_++, args);
      if (target.host->result_type) v.type = *target.host->result_type;
      return EvalValue::of(v);
    }
    if (target.kind == EvalValue::Func) {
      return invoke_function(target.func_decl, args);
    }
    fail("call of a non-function value");
  }

  // Names a function body (re)binds, so recursive activations do not clobber
  // each other.
  const std::vector<std::string>& bound_names(NodeId decl) {
    auto it = bound_names_cache_.find(decl);
    if (it != bound_names_cache_.end()) return it->second;
    std::vector<std::string> names;
    collect_bound_names(ast_.node(decl).children.back(), names);
    return bound_names_cache_.emplace(decl, std::move(names)).first->second;
  }

  void collect_bound_names(NodeId id, std::vector<std::string>& out) {
    if (id == kNoNode) return;
    const js::Node& n = ast_.node(id);
    if (n.kind == NodeKind::VariableDeclaration) {
      for (NodeId d : n.children) out.push_back(ast_.node(ast_.node(d).children[0]).text);
      return;
    }
    if (n.kind == NodeKind::FunctionDeclaration) return;
    for (NodeId c : n.children) collect_bound_names(c, out);
  }

  EvalValue invoke_function(NodeId decl, const std::vector<Value>& args) {
    if (++call_depth_ > 256) {
      --call_depth_;
      throw EvalTrap{TrapKind::Fuel};
    }
    const js::Node& fn = ast_.node(decl);
    Frame frame(*this);
    for (uint16_t i = 0; i < fn.aux; ++i) {
      const std::string& pname = ast_.node(fn.children[1 + static_cast<size_t>(i)]).text;
      frame.bind(pname, EvalValue::of(i < args.size() ? args[i] : Value::make_i32(0)));
    }
    for (const std::string& name : bound_names(decl)) {
      frame.bind(name, EvalValue::of(Value::make_i32(0)));
    }
    Signal sig = exec(fn.children.back());
    --call_depth_;
    if (sig.kind == Signal::ReturnSig && sig.value) return *sig.value;
    return EvalValue::of(Value::make_i32(0));
  }

  // ---- statements ----

  Signal exec(NodeId id) {
    burn();
    const js::Node& n = ast_.node(id);
    switch (n.kind) {
      case NodeKind::VariableDeclaration: {
        for (NodeId d : n.children) {
          const js::Node& declarator = ast_.node(d);
          const std::string& name = ast_.node(declarator.children[0]).text;
          Value v = declarator.children.size() > 1
                        ? plain(eval(declarator.children[1]), "initializer")
                        : Value::make_i32(0);
          env_[name] = EvalValue::of(v);
        }
        return {};
      }
      case NodeKind::AssignStatement: {
        const js::Node& target = ast_.node(n.children[0]);
        if (target.kind == NodeKind::Identifier) {
          Value v = plain(eval(n.children[1]), "assignment value");
          env_[target.text] = EvalValue::of(v);
          return {};
        }
        if (target.kind == NodeKind::MemberExpression) {
          const ssr::TypeTag* tag = tag_of(n.children[0]);
          if (!tag) fail("untagged member store");
          uint64_t addr = mem_index(target.children[1]);
          Value v = plain(eval(n.children[1]), "store value");
          mem_store(tag->op, addr, v);
          return {};
        }
        fail("unsupported assignment target");
      }
      case NodeKind::ExpressionStatement:
        eval(n.children[0]);
        return {};
      case NodeKind::IfStatement: {
        Value test = plain(eval(n.children[0]), "condition");
        if (test.truthy()) return exec(n.children[1]);
        if (n.children.size() > 2 && n.children[2] != kNoNode) return exec(n.children[2]);
        return {};
      }
      case NodeKind::BlockStatement: {
        for (NodeId stmt : n.children) {
          Signal sig = exec(stmt);
          if (sig.kind != Signal::Normal) return sig;
        }
        return {};
      }
      case NodeKind::LabeledStatement: {
        const js::Node& body = ast_.node(n.children[0]);
        if (body.kind == NodeKind::ForStatement) return exec_loop(n.children[0], n.text);
        Signal sig = exec(n.children[0]);
        if (sig.kind == Signal::BreakLoop && sig.label == n.text) return {};
        return sig;
      }
      case NodeKind::ForStatement:
        return exec_loop(id, "");
      case NodeKind::ReturnStatement: {
        Signal sig;
        sig.kind = Signal::ReturnSig;
        if (!n.children.empty()) sig.value = eval(n.children[0]);
        return sig;
      }
      case NodeKind::ThrowStatement: {
        const js::Node& arg = ast_.node(n.children[0]);
        if (arg.kind == NodeKind::StringLiteral && arg.text == "bad_indirect") {
          throw EvalTrap{TrapKind::BadIndirect};
        }
        throw EvalTrap{TrapKind::Unreachable};
      }
      case NodeKind::BreakStatement: {
        Signal sig;
        sig.kind = Signal::BreakLoop;
        sig.label = n.text;
        return sig;
      }
      case NodeKind::ContinueStatement: {
        Signal sig;
        sig.kind = Signal::ContinueLoop;
        sig.label = n.text;
        return sig;
      }
      case NodeKind::FunctionDeclaration:
        return {};  // hoisted
      case NodeKind::EmptyStatement:
        return {};
      default:
        fail(std::string("unsupported statement: ") + js::node_kind_name(n.kind));
    }
  }

  Signal exec_loop(NodeId for_id, const std::string& label) {
    const js::Node& loop = ast_.node(for_id);
    if (loop.children[0] != kNoNode || loop.children[1] != kNoNode ||
        loop.children[2] != kNoNode) {
      fail("only for(;;) loops are emitted");
    }
    for (;;) {
      burn();
      Signal sig = exec(loop.children[3]);
      switch (sig.kind) {
        case Signal::Normal:
          break;
        case Signal::ContinueLoop:
          if (sig.label.empty() || sig.label == label) break;
          return sig;
        case Signal::BreakLoop:
          if (sig.label.empty() || sig.label == label) return {};
          return sig;
        case Signal::ReturnSig:
          return sig;
      }
    }
  }

  const JsFragment& frag_;
  const Ast& ast_;
  EvalBindings& bindings_;
  uint64_t fuel_;
  size_t call_depth_ = 0;
  size_t host_ordinal_ = 0;
  std::unordered_map<std::string, EvalValue> env_;
  std::unordered_map<NodeId, std::string> print_cache_;
  std::unordered_map<NodeId, std::vector<std::string>> bound_names_cache_;
  HostTrace trace_;
};

}  // namespace

EvalOutcome eval_fragment(const JsFragment& frag, const std::vector<Value>& args,
                          EvalBindings& bindings, uint64_t fuel) {
  return Evaluator(frag, bindings, fuel).run(args);
}

}  // namespace jwbinder::oracle
