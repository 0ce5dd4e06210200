#include "jwbinder/ssr/abstraction.hpp"

#include <cmath>
#include <cstdlib>

#include "jwbinder/js/printer.hpp"

namespace jwbinder::ssr {

using js::Ast;
using js::kNoNode;
using js::NodeId;
using js::NodeKind;
using wasm::Instruction;
using wasm::Op;
using wasm::ValType;
using wasm::WasmModule;

namespace {

// JS operator for ops that have a direct equivalent; helpers cover the rest.
const char* js_operator(Op op) {
  switch (op) {
    case Op::I32Add: case Op::I64Add: case Op::F32Add: case Op::F64Add: return "+";
    case Op::I32Sub: case Op::I64Sub: case Op::F32Sub: case Op::F64Sub: return "-";
    case Op::I32Mul: case Op::I64Mul: case Op::F32Mul: case Op::F64Mul: return "*";
    case Op::I32DivS: case Op::I64DivS: case Op::F32Div: case Op::F64Div: return "/";
    case Op::I32RemS: case Op::I64RemS: return "%";
    case Op::I32And: case Op::I64And: return "&";
    case Op::I32Or: case Op::I64Or: return "|";
    case Op::I32Xor: case Op::I64Xor: return "^";
    case Op::I32Shl: case Op::I64Shl: return "<<";
    case Op::I32ShrS: case Op::I64ShrS: return ">>";
    case Op::I32Eq: case Op::I64Eq: case Op::F32Eq: case Op::F64Eq: return "===";
    case Op::I32Ne: case Op::I64Ne: case Op::F32Ne: case Op::F64Ne: return "!==";
    case Op::I32LtS: case Op::I64LtS: case Op::F32Lt: case Op::F64Lt: return "<";
    case Op::I32GtS: case Op::I64GtS: case Op::F32Gt: case Op::F64Gt: return ">";
    case Op::I32LeS: case Op::I64LeS: case Op::F32Le: case Op::F64Le: return "<=";
    case Op::I32GeS: case Op::I64GeS: case Op::F32Ge: case Op::F64Ge: return ">=";
    default: return nullptr;
  }
}

// Canonical helper name for ops simulated as user-defined functions.
const char* helper_name(Op op) {
  switch (op) {
    case Op::I32Popcnt: return "popcnt";
    case Op::I32Clz: return "clz";
    case Op::I32Ctz: return "ctz";
    case Op::I32Rotl: return "rotl";
    case Op::I32Rotr: return "rotr";
    case Op::I32DivU: return "div_u";
    case Op::I32RemU: return "rem_u";
    case Op::I32ShrU: return "shr_u";
    case Op::I32LtU: return "lt_u";
    case Op::I32GtU: return "gt_u";
    case Op::I32LeU: return "le_u";
    case Op::I32GeU: return "ge_u";
    case Op::I64Popcnt: return "i64_popcnt";
    case Op::I64Clz: return "i64_clz";
    case Op::I64Ctz: return "i64_ctz";
    case Op::I64Rotl: return "i64_rotl";
    case Op::I64Rotr: return "i64_rotr";
    case Op::I64DivU: return "i64_div_u";
    case Op::I64RemU: return "i64_rem_u";
    case Op::I64ShrU: return "i64_shr_u";
    case Op::I64LtU: return "i64_lt_u";
    case Op::I64GtU: return "i64_gt_u";
    case Op::I64LeU: return "i64_le_u";
    case Op::I64GeU: return "i64_ge_u";
    case Op::I32WrapI64: return "i32_wrap_i64";
    case Op::I32TruncF32S: return "i32_trunc_f32_s";
    case Op::I32TruncF32U: return "i32_trunc_f32_u";
    case Op::I32TruncF64S: return "i32_trunc_f64_s";
    case Op::I32TruncF64U: return "i32_trunc_f64_u";
    case Op::I64ExtendI32S: return "i64_extend_i32_s";
    case Op::I64ExtendI32U: return "i64_extend_i32_u";
    case Op::I64TruncF32S: return "i64_trunc_f32_s";
    case Op::I64TruncF32U: return "i64_trunc_f32_u";
    case Op::I64TruncF64S: return "i64_trunc_f64_s";
    case Op::I64TruncF64U: return "i64_trunc_f64_u";
    case Op::F32ConvertI32S: return "f32_convert_i32_s";
    case Op::F32ConvertI32U: return "f32_convert_i32_u";
    case Op::F32ConvertI64S: return "f32_convert_i64_s";
    case Op::F32ConvertI64U: return "f32_convert_i64_u";
    case Op::F32DemoteF64: return "f32_demote_f64";
    case Op::F64ConvertI32S: return "f64_convert_i32_s";
    case Op::F64ConvertI32U: return "f64_convert_i32_u";
    case Op::F64ConvertI64S: return "f64_convert_i64_s";
    case Op::F64ConvertI64U: return "f64_convert_i64_u";
    case Op::F64PromoteF32: return "f64_promote_f32";
    case Op::MemoryGrow: return "memory_grow";
    default: return nullptr;
  }
}

Op const_op_for(ValType t) {
  switch (t) {
    case ValType::I32: return Op::I32Const;
    case ValType::I64: return Op::I64Const;
    case ValType::F32: return Op::F32Const;
    case ValType::F64: return Op::F64Const;
  }
  return Op::I32Const;
}

std::optional<ValType> load_result(Op op) {
  switch (op) {
    case Op::I32Load: case Op::I32Load8S: case Op::I32Load8U:
    case Op::I32Load16S: case Op::I32Load16U:
      return ValType::I32;
    case Op::I64Load: case Op::I64Load8S: case Op::I64Load8U:
    case Op::I64Load16S: case Op::I64Load16U: case Op::I64Load32S: case Op::I64Load32U:
      return ValType::I64;
    case Op::F32Load: return ValType::F32;
    case Op::F64Load: return ValType::F64;
    default: return std::nullopt;
  }
}

bool is_store(Op op) {
  switch (op) {
    case Op::I32Store: case Op::I64Store: case Op::F32Store: case Op::F64Store:
    case Op::I32Store8: case Op::I32Store16:
    case Op::I64Store8: case Op::I64Store16: case Op::I64Store32:
      return true;
    default: return false;
  }
}

bool branches_to_depth(const std::vector<Instruction>& instrs, uint32_t depth) {
  for (const Instruction& i : instrs) {
    switch (i.op) {
      case Op::Br:
      case Op::BrIf:
        if (i.a == depth) return true;
        break;
      case Op::BrTable: {
        if (i.a == depth) return true;
        for (uint32_t c : i.table) {
          if (c == depth) return true;
        }
        break;
      }
      case Op::Block:
      case Op::Loop:
        if (branches_to_depth(i.body, depth + 1)) return true;
        break;
      case Op::If:
        if (branches_to_depth(i.body, depth + 1)) return true;
        if (branches_to_depth(i.else_body, depth + 1)) return true;
        break;
      default:
        break;
    }
  }
  return false;
}

struct StackValue {
  NodeId expr;  // always an identifier
  ValType type;
  std::optional<int64_t> const_val;
};

// State shared by all function abstractions inside one fragment.
struct SpliceState {
  const AbstractionContext* ctx;
  JsFragment* frag;
  std::map<uint32_t, std::string> internal_names;      // func index -> name
  std::vector<NodeId> pending_decls;                   // function declarations
  std::map<uint32_t, std::string> indirect_stubs;      // type index -> stub name
  struct GlobalInfo { std::string name; ValType type; NodeId init; };
  std::map<uint32_t, GlobalInfo> globals;
  uint32_t stub_count = 0;

  NameGenerator& names() { return *ctx->names; }
  const WasmModule& module() { return *ctx->module; }
  Ast& ast() { return frag->ast; }
};

class FunctionAbstraction {
 public:
  FunctionAbstraction(SpliceState& state, uint32_t func_index)
      : state_(state),
        ast_(state.ast()),
        module_(state.module()),
        func_index_(func_index),
        fn_(state.module().defined_func(func_index)),
        sig_(state.module().func_type(func_index)) {}

  // Top-level entry: fills the fragment's parameter/locals metadata and
  // returns [local decls..., body...] plus the result expression.
  std::pair<std::vector<NodeId>, NodeId> run_top() {
    init_names(&state_.frag->param_names);
    std::vector<NodeId> body = abstract_body();
    std::vector<NodeId> out = local_decls_;
    out.insert(out.end(), body.begin(), body.end());
    return {out, result_expr()};
  }

  // Nested entry: a full function declaration.
  NodeId run_as_declaration(const std::string& name) {
    init_names(nullptr);
    std::vector<NodeId> body = abstract_body();
    NodeId result = result_expr();
    NodeId decl = ast_.make(NodeKind::FunctionDeclaration);
    NodeId name_node = make_ident(name);
    ast_.attach(decl, name_node);
    for (const std::string& p : param_names_) ast_.attach(decl, make_ident(p));
    ast_.node(decl).aux = static_cast<uint16_t>(param_names_.size());
    NodeId block = ast_.make(NodeKind::BlockStatement);
    for (NodeId d : local_decls_) ast_.attach(block, d);
    for (NodeId s : body) ast_.attach(block, s);
    if (result != kNoNode) {
      bool ends_with_return =
          !body.empty() && ast_.node(body.back()).kind == NodeKind::ReturnStatement;
      if (!ends_with_return) {
        NodeId ret = ast_.make(NodeKind::ReturnStatement);
        ast_.attach(ret, result);
        ast_.attach(block, ret);
      }
    }
    ast_.attach(decl, block);
    return decl;
  }

 private:
  void init_names(std::vector<std::string>* export_params) {
    for (uint32_t i = 0; i < sig_.params.size(); ++i) {
      std::string name = state_.names().indexed("p", i);
      param_names_.push_back(name);
      local_names_.push_back(name);
      local_types_.push_back(sig_.params[i]);
    }
    if (export_params) {
      *export_params = param_names_;
      state_.frag->param_types = sig_.params;
      state_.frag->result_type =
          sig_.results.empty() ? std::nullopt : std::make_optional(sig_.results[0]);
    }
    for (uint32_t j = 0; j < fn_.locals.size(); ++j) {
      std::string name = state_.names().indexed("loc", j);
      local_names_.push_back(name);
      local_types_.push_back(fn_.locals[j]);
      NodeId decl = make_decl(js::DeclKind::Let, name, typed_zero(fn_.locals[j]));
      local_decls_.push_back(decl);
    }
  }

  std::vector<NodeId> abstract_body() {
    std::vector<NodeId> out;
    bool dead = walk(fn_.body, out);
    body_dead_ = dead;
    return out;
  }

  NodeId result_expr() {
    if (!sig_.results.empty() && !body_dead_ && !stack_.empty()) return stack_.back().expr;
    if (last_return_arg_ != kNoNode) return last_return_arg_;
    return kNoNode;
  }

  // ---- node factories ----

  NodeId make_ident(const std::string& name) {
    NodeId id = ast_.make(NodeKind::Identifier);
    ast_.node(id).text = name;
    return id;
  }

  NodeId make_number(double v) {
    if (v < 0 || (v == 0 && std::signbit(v))) {
      NodeId lit = ast_.make(NodeKind::NumberLiteral);
      ast_.node(lit).num = -v;
      NodeId neg = ast_.make(NodeKind::UnaryExpression);
      ast_.node(neg).text = "-";
      ast_.attach(neg, lit);
      return neg;
    }
    NodeId lit = ast_.make(NodeKind::NumberLiteral);
    ast_.node(lit).num = v;
    return lit;
  }

  NodeId make_decl(js::DeclKind kind, const std::string& name, NodeId init) {
    NodeId decl = ast_.make(NodeKind::VariableDeclaration);
    ast_.node(decl).aux = static_cast<uint16_t>(kind);
    NodeId declarator = ast_.make(NodeKind::VariableDeclarator);
    ast_.attach(declarator, make_ident(name));
    ast_.attach(declarator, init);
    ast_.attach(decl, declarator);
    return decl;
  }

  NodeId make_assign(NodeId target, NodeId value) {
    NodeId assign = ast_.make(NodeKind::AssignStatement);
    ast_.node(assign).text = "=";
    ast_.attach(assign, target);
    ast_.attach(assign, value);
    return assign;
  }

  NodeId make_block(const std::vector<NodeId>& stmts) {
    NodeId block = ast_.make(NodeKind::BlockStatement);
    for (NodeId s : stmts) ast_.attach(block, s);
    return block;
  }

  NodeId typed_zero(ValType t) {
    NodeId lit = make_number(0);
    tag(lit, const_op_for(t));
    return lit;
  }

  void tag(NodeId node, Op op, uint32_t mem_offset = 0) {
    state_.frag->tags[node] = TypeTag{op, mem_offset};
  }

  // ---- stack ----

  void push(NodeId expr, ValType type, std::optional<int64_t> const_val = std::nullopt) {
    stack_.push_back({expr, type, const_val});
  }

  StackValue pop(const Instruction& at) {
    if (stack_.empty()) {
      throw AbstractionError(std::string("stack underflow at ") + wasm::mnemonic(at.op) +
                             " offset " + std::to_string(at.offset));
    }
    StackValue v = stack_.back();
    stack_.pop_back();
    return v;
  }

  StackValue peek(const Instruction& at) {
    if (stack_.empty()) {
      throw AbstractionError(std::string("stack underflow at ") + wasm::mnemonic(at.op) +
                             " offset " + std::to_string(at.offset));
    }
    return stack_.back();
  }

  std::vector<StackValue> pop_args(size_t n, const Instruction& at) {
    std::vector<StackValue> args(n, StackValue{kNoNode, ValType::I32, {}});
    for (size_t i = 0; i < n; ++i) args[n - 1 - i] = pop(at);
    return args;
  }

  // Emits `const T_n = <init>;`, pushes and returns the temp.
  std::string emit_temp(std::vector<NodeId>& out, NodeId init, ValType type) {
    std::string name = state_.names().fresh("T");
    out.push_back(make_decl(js::DeclKind::Const, name, init));
    push(make_ident(name), type);
    return name;
  }

  // ---- structure ----

  struct BlockCtx {
    std::string label;
    bool is_loop;
    std::optional<ValType> result;
    std::string result_temp;
    size_t entry_height;
  };

  // Returns true when the run ended with an unconditional transfer.
  bool walk(const std::vector<Instruction>& instrs, std::vector<NodeId>& out) {
    for (const Instruction& instr : instrs) {
      if (step(instr, out)) return true;  // rest of the block is unreachable
    }
    return false;
  }

  void emit_branch(uint32_t depth, const Instruction& at, std::vector<NodeId>& out,
                   bool keep_value) {
    if (depth >= blocks_.size()) {
      // Function-level target: behaves like return.
      NodeId ret = ast_.make(NodeKind::ReturnStatement);
      if (!sig_.results.empty()) {
        StackValue v = keep_value ? peek(at) : pop(at);
        NodeId arg = ast_.clone_from(ast_, v.expr);
        ast_.attach(ret, arg);
        last_return_arg_ = arg;
      }
      out.push_back(ret);
      return;
    }
    BlockCtx& target = blocks_[blocks_.size() - 1 - depth];
    if (!target.is_loop && !target.result_temp.empty()) {
      StackValue v = keep_value ? peek(at) : pop(at);
      out.push_back(make_assign(make_ident(target.result_temp), ast_.clone_from(ast_, v.expr)));
    }
    NodeId jump = ast_.make(target.is_loop ? NodeKind::ContinueStatement : NodeKind::BreakStatement);
    ast_.node(jump).text = target.label;
    out.push_back(jump);
  }

  // `L: for (;;) { <body>; break L; }`; the trailing break is dropped when
  // the body already left unconditionally.
  NodeId labeled_loop(const std::string& label, std::vector<NodeId> body,
                      bool add_break = true) {
    if (add_break) {
      NodeId brk = ast_.make(NodeKind::BreakStatement);
      ast_.node(brk).text = label;
      body.push_back(brk);
    }
    NodeId loop = ast_.make(NodeKind::ForStatement);
    ast_.attach(loop, kNoNode);
    ast_.attach(loop, kNoNode);
    ast_.attach(loop, kNoNode);
    ast_.attach(loop, make_block(body));
    NodeId labeled = ast_.make(NodeKind::LabeledStatement);
    ast_.node(labeled).text = label;
    ast_.attach(labeled, loop);
    return labeled;
  }

  const std::string& mem_name() {
    if (state_.frag->mem_name.empty()) {
      state_.frag->mem_name =
          state_.names().derived(state_.names().site_prefix() + "MEM", "");
    }
    return state_.frag->mem_name;
  }

  NodeId mem_index_expr(StackValue addr, uint32_t offset) {
    if (offset == 0) return addr.expr;
    NodeId add = ast_.make(NodeKind::BinaryExpression);
    ast_.node(add).text = "+";
    ast_.attach(add, addr.expr);
    ast_.attach(add, make_number(offset));
    tag(add, Op::I32Add);
    return add;
  }

  NodeId mem_access(StackValue addr, const Instruction& instr) {
    NodeId member = ast_.make(NodeKind::MemberExpression);
    ast_.node(member).flags |= js::kFlagComputed;
    ast_.attach(member, make_ident(mem_name()));
    ast_.attach(member, mem_index_expr(addr, instr.b));
    tag(member, instr.op, instr.b);
    return member;
  }

  std::string ensure_global(uint32_t index) {
    auto it = state_.globals.find(index);
    if (it != state_.globals.end()) return it->second.name;
    SpliceState::GlobalInfo info;
    info.name = state_.names().indexed("glob", index);
    const auto& globals = module_.globals;
    if (index < globals.size()) {
      info.type = globals[index].type;
      const auto& init = globals[index].init;
      if (init.size() == 1 && wasm::value_op_signature(init[0].op) &&
          wasm::value_op_signature(init[0].op)->params.empty()) {
        info.init = const_init(init[0]);
      } else {
        info.init = typed_zero(info.type);
      }
    } else {
      info.type = ValType::I32;
      info.init = typed_zero(ValType::I32);
      state_.frag->diagnostics.push_back("imported global " + std::to_string(index) +
                                         " modeled as 0");
    }
    state_.globals.emplace(index, info);
    return state_.globals[index].name;
  }

  NodeId const_init(const Instruction& instr) {
    NodeId node;
    switch (instr.op) {
      case Op::I32Const:
        node = make_number(static_cast<double>(static_cast<int32_t>(instr.i64_val)));
        break;
      case Op::I64Const: {
        int64_t v = instr.i64_val;
        if (v <= (int64_t{1} << 53) && v >= -(int64_t{1} << 53)) {
          node = make_number(static_cast<double>(v));
        } else {
          // i64("...") keeps the value exact as a signature-visible token.
          NodeId call = ast_.make(NodeKind::CallExpression);
          ast_.attach(call, make_ident(require_helper_named("i64")));
          NodeId s = ast_.make(NodeKind::StringLiteral);
          ast_.node(s).text = std::to_string(v);
          ast_.attach(call, s);
          node = call;
        }
        break;
      }
      case Op::F32Const:
        node = make_number(static_cast<double>(instr.f32_val));
        break;
      case Op::F64Const:
        node = make_number(instr.f64_val);
        break;
      default:
        node = make_number(0);
        break;
    }
    tag(node, instr.op);
    return node;
  }

  std::string require_helper(Op op) {
    return require_helper_named(helper_name(op));
  }

  std::string require_helper_named(const std::string& canonical) {
    std::string actual = state_.names().fixed(canonical);
    state_.frag->helpers_used[actual] = canonical;
    return actual;
  }

  NodeId import_callee(uint32_t func_index) {
    const auto& imports = state_.ctx->func_imports;
    if (func_index < imports.size() && imports[func_index]) {
      const BoundImport& b = *imports[func_index];
      if (b.src_ast) return ast_.clone_from(*b.src_ast, b.expr);
      // Synthesize module.field from the label.
      size_t dot = b.label.find('.');
      if (dot == std::string::npos) return make_ident(b.label);
      NodeId member = ast_.make(NodeKind::MemberExpression);
      ast_.attach(member, make_ident(b.label.substr(0, dot)));
      ast_.attach(member, make_ident(b.label.substr(dot + 1)));
      return member;
    }
    const wasm::Import& imp = module_.func_import(func_index);
    std::string name = state_.names().fixed("IMPORT_" + std::to_string(func_index));
    state_.frag->diagnostics.push_back("unbound import " + std::to_string(func_index) + " (" +
                                       imp.module + "." + imp.field + ") emitted as " + name);
    return make_ident(name);
  }

  std::string ensure_internal(uint32_t func_index) {
    auto it = state_.internal_names.find(func_index);
    if (it != state_.internal_names.end()) return it->second;
    std::string name = state_.names().fresh("F");
    state_.internal_names.emplace(func_index, name);
    const wasm::Function& fn = module_.defined_func(func_index);
    if (!fn.body_ok) {
      // Undecodable callee: keep the call shape, trap if ever evaluated.
      NodeId decl = ast_.make(NodeKind::FunctionDeclaration);
      ast_.attach(decl, make_ident(name));
      ast_.node(decl).aux = 0;
      NodeId thr = ast_.make(NodeKind::ThrowStatement);
      NodeId s = ast_.make(NodeKind::StringLiteral);
      ast_.node(s).text = "unreachable";
      ast_.attach(thr, s);
      ast_.attach(decl, make_block({thr}));
      state_.pending_decls.push_back(decl);
      state_.frag->diagnostics.push_back("callee " + std::to_string(func_index) +
                                         " skipped: " + fn.body_error);
      return name;
    }
    FunctionAbstraction nested(state_, func_index);
    state_.pending_decls.push_back(nested.run_as_declaration(name));
    return name;
  }

  // Element-section lookup for statically resolvable indirect calls.
  std::optional<uint32_t> table_slot(int64_t slot) {
    std::optional<uint32_t> found;
    for (const wasm::ElementSegment& seg : module_.elements) {
      if (!seg.const_offset) continue;
      int64_t offset = *seg.const_offset;
      if (slot >= offset && slot < offset + static_cast<int64_t>(seg.func_indices.size())) {
        found = seg.func_indices[static_cast<size_t>(slot - offset)];
      }
    }
    return found;
  }

  std::string ensure_indirect_stub(uint32_t type_index) {
    auto it = state_.indirect_stubs.find(type_index);
    if (it != state_.indirect_stubs.end()) return it->second;
    std::string name = state_.names().fresh("INDIRECT");
    state_.indirect_stubs.emplace(type_index, name);
    std::string param = state_.names().indexed("idx", state_.stub_count++);

    std::vector<NodeId> body;
    const wasm::FuncType& expected = module_.types[type_index];
    for (const wasm::ElementSegment& seg : module_.elements) {
      if (!seg.const_offset) continue;
      for (size_t j = 0; j < seg.func_indices.size(); ++j) {
        uint32_t func = seg.func_indices[j];
        if (!(module_.func_type(func) == expected)) continue;
        uint32_t slot = *seg.const_offset + static_cast<uint32_t>(j);
        NodeId cmp = ast_.make(NodeKind::BinaryExpression);
        ast_.node(cmp).text = "===";
        ast_.attach(cmp, make_ident(param));
        ast_.attach(cmp, make_number(slot));
        NodeId ret = ast_.make(NodeKind::ReturnStatement);
        NodeId callee = module_.is_imported_func(func) ? import_callee(func)
                                                       : make_ident(ensure_internal(func));
        ast_.attach(ret, callee);
        NodeId iff = ast_.make(NodeKind::IfStatement);
        ast_.attach(iff, cmp);
        ast_.attach(iff, make_block({ret}));
        body.push_back(iff);
      }
    }
    NodeId thr = ast_.make(NodeKind::ThrowStatement);
    NodeId s = ast_.make(NodeKind::StringLiteral);
    ast_.node(s).text = "bad_indirect";
    ast_.attach(thr, s);
    body.push_back(thr);

    NodeId decl = ast_.make(NodeKind::FunctionDeclaration);
    ast_.attach(decl, make_ident(name));
    ast_.attach(decl, make_ident(param));
    ast_.node(decl).aux = 1;
    ast_.attach(decl, make_block(body));
    state_.pending_decls.push_back(decl);
    return name;
  }

  void emit_call(std::vector<NodeId>& out, NodeId callee, const std::vector<StackValue>& args,
                 const wasm::FuncType& sig) {
    NodeId call = ast_.make(NodeKind::CallExpression);
    ast_.attach(call, callee);
    for (const StackValue& a : args) ast_.attach(call, a.expr);
    if (!sig.results.empty()) {
      emit_temp(out, call, sig.results[0]);
    } else {
      NodeId stmt = ast_.make(NodeKind::ExpressionStatement);
      ast_.attach(stmt, call);
      out.push_back(stmt);
    }
  }

  // One abstraction rule application; returns true when control
  // unconditionally left this block.
  bool step(const Instruction& instr, std::vector<NodeId>& out) {
    switch (instr.op) {
      case Op::Nop:
        return false;
      case Op::Unreachable: {
        NodeId thr = ast_.make(NodeKind::ThrowStatement);
        NodeId s = ast_.make(NodeKind::StringLiteral);
        ast_.node(s).text = "unreachable";
        ast_.attach(thr, s);
        out.push_back(thr);
        return true;
      }
      case Op::Drop:
        pop(instr);
        return false;
      case Op::Select: {
        StackValue c = pop(instr);
        StackValue b = pop(instr);
        StackValue a = pop(instr);
        NodeId cond = ast_.make(NodeKind::ConditionalExpression);
        ast_.attach(cond, c.expr);
        ast_.attach(cond, a.expr);
        ast_.attach(cond, b.expr);
        emit_temp(out, cond, a.type);
        return false;
      }
      case Op::LocalGet:
        push(make_ident(local_names_.at(instr.a)), local_types_.at(instr.a));
        return false;
      case Op::LocalSet: {
        StackValue v = pop(instr);
        out.push_back(make_assign(make_ident(local_names_.at(instr.a)), v.expr));
        return false;
      }
      case Op::LocalTee: {
        StackValue v = pop(instr);
        out.push_back(make_assign(make_ident(local_names_.at(instr.a)), v.expr));
        push(make_ident(local_names_.at(instr.a)), local_types_.at(instr.a));
        return false;
      }
      case Op::GlobalGet: {
        std::string name = ensure_global(instr.a);
        push(make_ident(name), state_.globals[instr.a].type);
        return false;
      }
      case Op::GlobalSet: {
        std::string name = ensure_global(instr.a);
        StackValue v = pop(instr);
        out.push_back(make_assign(make_ident(name), v.expr));
        return false;
      }
      case Op::I32Const:
      case Op::I64Const:
      case Op::F32Const:
      case Op::F64Const: {
        NodeId init = const_init(instr);
        std::string name = state_.names().fresh("C");
        out.push_back(make_decl(js::DeclKind::Const, name, init));
        std::optional<int64_t> cv;
        if (instr.op == Op::I32Const || instr.op == Op::I64Const) cv = instr.i64_val;
        ValType t = instr.op == Op::I32Const   ? ValType::I32
                    : instr.op == Op::I64Const ? ValType::I64
                    : instr.op == Op::F32Const ? ValType::F32
                                               : ValType::F64;
        push(make_ident(name), t, cv);
        return false;
      }
      case Op::MemorySize: {
        NodeId member = ast_.make(NodeKind::MemberExpression);
        ast_.attach(member, make_ident(mem_name()));
        ast_.attach(member, make_ident("length"));
        tag(member, Op::MemorySize);
        emit_temp(out, member, ValType::I32);
        return false;
      }
      case Op::MemoryGrow: {
        StackValue n = pop(instr);
        NodeId call = ast_.make(NodeKind::CallExpression);
        ast_.attach(call, make_ident(require_helper(Op::MemoryGrow)));
        ast_.attach(call, n.expr);
        tag(call, Op::MemoryGrow);
        emit_temp(out, call, ValType::I32);
        return false;
      }
      case Op::Block:
      case Op::Loop: {
        bool is_loop = instr.op == Op::Loop;
        std::string temp;
        if (instr.block_result) {
          temp = state_.names().fresh("T");
          out.push_back(make_decl(js::DeclKind::Let, temp, typed_zero(*instr.block_result)));
        }
        std::string label = state_.names().fresh("L");
        blocks_.push_back({label, is_loop, instr.block_result, temp, stack_.size()});
        std::vector<NodeId> body;
        bool dead = walk(instr.body, body);
        if (instr.block_result && !dead) {
          StackValue v = pop(instr);
          body.push_back(make_assign(make_ident(temp), v.expr));
        }
        size_t entry = blocks_.back().entry_height;
        blocks_.pop_back();
        if (stack_.size() > entry) stack_.resize(entry);
        out.push_back(labeled_loop(label, std::move(body), !dead));
        if (instr.block_result) push(make_ident(temp), *instr.block_result);
        return false;
      }
      case Op::If: {
        StackValue cond = pop(instr);
        bool targeted = branches_to_depth(instr.body, 0) || branches_to_depth(instr.else_body, 0);
        std::string temp;
        if (instr.block_result) {
          temp = state_.names().fresh("T");
          out.push_back(make_decl(js::DeclKind::Let, temp, typed_zero(*instr.block_result)));
        }
        std::string label = targeted ? state_.names().fresh("L") : "";
        blocks_.push_back({label, false, instr.block_result, temp, stack_.size()});
        std::vector<StackValue> snapshot = stack_;

        std::vector<NodeId> then_body;
        bool then_dead = walk(instr.body, then_body);
        if (instr.block_result && !then_dead) {
          StackValue v = pop(instr);
          then_body.push_back(make_assign(make_ident(temp), v.expr));
        }
        stack_ = snapshot;
        std::vector<NodeId> else_stmts;
        bool have_else = !instr.else_body.empty() || instr.block_result.has_value();
        if (have_else) {
          bool else_dead = walk(instr.else_body, else_stmts);
          if (instr.block_result && !else_dead) {
            StackValue v = pop(instr);
            else_stmts.push_back(make_assign(make_ident(temp), v.expr));
          }
        }
        stack_ = snapshot;
        blocks_.pop_back();

        NodeId iff = ast_.make(NodeKind::IfStatement);
        ast_.attach(iff, cond.expr);
        ast_.attach(iff, make_block(then_body));
        if (have_else) ast_.attach(iff, make_block(else_stmts));
        if (targeted) {
          out.push_back(labeled_loop(label, {iff}));
        } else {
          out.push_back(iff);
        }
        if (instr.block_result) push(make_ident(temp), *instr.block_result);
        return false;
      }
      case Op::Br:
        emit_branch(instr.a, instr, out, false);
        return true;
      case Op::BrIf: {
        StackValue cond = pop(instr);
        std::vector<NodeId> body;
        emit_branch(instr.a, instr, body, true);
        NodeId iff = ast_.make(NodeKind::IfStatement);
        ast_.attach(iff, cond.expr);
        ast_.attach(iff, make_block(body));
        out.push_back(iff);
        return false;
      }
      case Op::BrTable: {
        StackValue idx = pop(instr);
        for (size_t i = 0; i < instr.table.size(); ++i) {
          NodeId cmp = ast_.make(NodeKind::BinaryExpression);
          ast_.node(cmp).text = "===";
          ast_.attach(cmp, ast_.clone_from(ast_, idx.expr));
          ast_.attach(cmp, make_number(static_cast<double>(i)));
          tag(cmp, Op::I32Eq);
          std::vector<NodeId> body;
          emit_branch(instr.table[i], instr, body, true);
          NodeId iff = ast_.make(NodeKind::IfStatement);
          ast_.attach(iff, cmp);
          ast_.attach(iff, make_block(body));
          out.push_back(iff);
        }
        emit_branch(instr.a, instr, out, true);
        return true;
      }
      case Op::Return: {
        NodeId ret = ast_.make(NodeKind::ReturnStatement);
        if (!sig_.results.empty()) {
          StackValue v = pop(instr);
          ast_.attach(ret, v.expr);
          last_return_arg_ = v.expr;
        }
        out.push_back(ret);
        return true;
      }
      case Op::Call: {
        uint32_t callee_index = instr.a;
        const wasm::FuncType& sig = module_.func_type(callee_index);
        std::vector<StackValue> args = pop_args(sig.params.size(), instr);
        NodeId callee = module_.is_imported_func(callee_index)
                            ? import_callee(callee_index)
                            : make_ident(ensure_internal(callee_index));
        emit_call(out, callee, args, sig);
        return false;
      }
      case Op::CallIndirect: {
        StackValue idx = pop(instr);
        const wasm::FuncType& sig = module_.types.at(instr.a);
        std::vector<StackValue> args = pop_args(sig.params.size(), instr);
        if (idx.const_val) {
          if (auto func = table_slot(*idx.const_val); func && module_.func_type(*func) == sig) {
            NodeId callee = module_.is_imported_func(*func)
                                ? import_callee(*func)
                                : make_ident(ensure_internal(*func));
            emit_call(out, callee, args, sig);
            return false;
          }
        }
        std::string stub = ensure_indirect_stub(instr.a);
        NodeId inner = ast_.make(NodeKind::CallExpression);
        ast_.attach(inner, make_ident(stub));
        ast_.attach(inner, idx.expr);
        emit_call(out, inner, args, sig);
        return false;
      }
      default:
        break;
    }

    if (auto result = load_result(instr.op)) {
      StackValue addr = pop(instr);
      emit_temp(out, mem_access(addr, instr), *result);
      return false;
    }
    if (is_store(instr.op)) {
      StackValue v = pop(instr);
      StackValue addr = pop(instr);
      out.push_back(make_assign(mem_access(addr, instr), v.expr));
      return false;
    }

    if (auto sig = wasm::value_op_signature(instr.op)) {
      std::vector<StackValue> args = pop_args(sig->params.size(), instr);
      NodeId expr;
      if (instr.op == Op::I32Eqz || instr.op == Op::I64Eqz) {
        NodeId cmp = ast_.make(NodeKind::BinaryExpression);
        ast_.node(cmp).text = "===";
        ast_.attach(cmp, args[0].expr);
        ast_.attach(cmp, make_number(0));
        expr = cmp;
      } else if (const char* op_text = js_operator(instr.op)) {
        NodeId bin = ast_.make(NodeKind::BinaryExpression);
        ast_.node(bin).text = op_text;
        ast_.attach(bin, args[0].expr);
        ast_.attach(bin, args[1].expr);
        expr = bin;
      } else if (helper_name(instr.op)) {
        NodeId call = ast_.make(NodeKind::CallExpression);
        ast_.attach(call, make_ident(require_helper(instr.op)));
        for (const StackValue& a : args) ast_.attach(call, a.expr);
        expr = call;
      } else {
        throw AbstractionError(std::string("no rule for ") + wasm::mnemonic(instr.op));
      }
      tag(expr, instr.op);
      emit_temp(out, expr, sig->result.value_or(ValType::I32));
      return false;
    }

    throw AbstractionError(std::string("no rule for ") + wasm::mnemonic(instr.op));
  }

  SpliceState& state_;
  Ast& ast_;
  const WasmModule& module_;
  uint32_t func_index_;
  const wasm::Function& fn_;
  const wasm::FuncType& sig_;

  std::vector<StackValue> stack_;
  std::vector<BlockCtx> blocks_;
  std::vector<std::string> param_names_;
  std::vector<std::string> local_names_;
  std::vector<ValType> local_types_;
  std::vector<NodeId> local_decls_;
  NodeId last_return_arg_ = kNoNode;
  bool body_dead_ = false;
};

}  // namespace

AbstractionContext standalone_context(const WasmModule& module, NameGenerator& names) {
  AbstractionContext ctx;
  ctx.module = &module;
  ctx.names = &names;
  uint32_t func_index = 0;
  for (const wasm::Import& imp : module.imports) {
    if (imp.kind != wasm::ExternalKind::Func) continue;
    BoundImport b;
    b.label = imp.module + "." + imp.field;
    ctx.func_imports.resize(func_index + 1);
    ctx.func_imports[func_index] = b;
    ++func_index;
  }
  return ctx;
}

JsFragment abstract_function(const AbstractionContext& ctx, uint32_t func_index) {
  const WasmModule& module = *ctx.module;
  if (module.is_imported_func(func_index)) {
    throw AbstractionError("cannot abstract an imported function");
  }
  const wasm::Function& fn = module.defined_func(func_index);
  if (!fn.body_ok) {
    throw AbstractionError("function body was not decoded: " + fn.body_error);
  }

  JsFragment frag;
  NodeId program = frag.ast.make(NodeKind::Program);
  frag.ast.set_root(program);

  SpliceState state;
  state.ctx = &ctx;
  state.frag = &frag;

  FunctionAbstraction top(state, func_index);
  auto [body, result] = top.run_top();
  frag.result_expr = result;

  // Globals first so everything below them reads top-down; the synthesized
  // function declarations follow, then the entry body.
  for (const auto& [index, info] : state.globals) {
    NodeId decl = frag.ast.make(NodeKind::VariableDeclaration);
    frag.ast.node(decl).aux = static_cast<uint16_t>(js::DeclKind::Let);
    NodeId declarator = frag.ast.make(NodeKind::VariableDeclarator);
    NodeId name_node = frag.ast.make(NodeKind::Identifier);
    frag.ast.node(name_node).text = info.name;
    frag.ast.attach(declarator, name_node);
    frag.ast.attach(declarator, info.init);
    frag.ast.attach(decl, declarator);
    frag.ast.attach(program, decl);
  }
  for (NodeId decl : state.pending_decls) frag.ast.attach(program, decl);
  for (NodeId stmt : body) frag.ast.attach(program, stmt);
  return frag;
}

JsFragment abstract_data(const WasmModule& module, NameGenerator& names) {
  JsFragment frag;
  NodeId program = frag.ast.make(NodeKind::Program);
  frag.ast.set_root(program);
  Ast& ast = frag.ast;

  auto make_const = [&](const std::string& name, NodeId init) {
    NodeId decl = ast.make(NodeKind::VariableDeclaration);
    ast.node(decl).aux = static_cast<uint16_t>(js::DeclKind::Const);
    NodeId declarator = ast.make(NodeKind::VariableDeclarator);
    NodeId id = ast.make(NodeKind::Identifier);
    ast.node(id).text = name;
    ast.attach(declarator, id);
    ast.attach(declarator, init);
    ast.attach(decl, declarator);
    ast.attach(program, decl);
  };

  for (const wasm::DataSegment& seg : module.data_segments) {
    std::string name = names.fresh("DATA");
    frag.data_names.push_back(name);

    size_t printable = 0;
    for (uint8_t b : seg.bytes) {
      if ((b >= 0x20 && b <= 0x7E) || b == '\t' || b == '\n' || b == '\r') ++printable;
    }
    bool as_string = seg.bytes.empty() || printable * 10 >= seg.bytes.size() * 9;

    NodeId init;
    if (as_string) {
      init = ast.make(NodeKind::StringLiteral);
      ast.node(init).text = std::string(seg.bytes.begin(), seg.bytes.end());
    } else {
      init = ast.make(NodeKind::ArrayExpression);
      for (uint8_t b : seg.bytes) {
        NodeId lit = ast.make(NodeKind::NumberLiteral);
        ast.node(lit).num = b;
        ast.attach(init, lit);
      }
    }
    make_const(name, init);

    std::string offset_name = names.derived(name, "_OFFSET");
    NodeId offset_init;
    if (seg.const_offset) {
      offset_init = ast.make(NodeKind::NumberLiteral);
      ast.node(offset_init).num = *seg.const_offset;
    } else {
      offset_init = ast.make(NodeKind::StringLiteral);
      ast.node(offset_init).text = "dynamic";
    }
    make_const(offset_name, offset_init);
  }
  return frag;
}

namespace {

std::string helper_source(const std::string& canonical, const std::string& actual) {
  auto def = [&](const char* params, const char* body) {
    return "function " + actual + "(" + params + ") { " + body + " }\n";
  };
  if (canonical == "popcnt" || canonical == "i64_popcnt") {
    return def("x", "var n = 0; for (var i = 0; i < 32; i++) { n = n + ((x >> i) & 1); } return n;");
  }
  if (canonical == "clz" || canonical == "i64_clz") {
    return def("x", "for (var i = 0; i < 32; i++) { if ((x >> (31 - i)) & 1) { return i; } } return 32;");
  }
  if (canonical == "ctz" || canonical == "i64_ctz") {
    return def("x", "for (var i = 0; i < 32; i++) { if ((x >> i) & 1) { return i; } } return 32;");
  }
  if (canonical == "rotl" || canonical == "i64_rotl") {
    return def("x, n", "n = n & 31; return (x << n) | (x >>> (32 - n));");
  }
  if (canonical == "rotr" || canonical == "i64_rotr") {
    return def("x, n", "n = n & 31; return (x >>> n) | (x << (32 - n));");
  }
  if (canonical == "div_u" || canonical == "i64_div_u") {
    return def("a, b", "return Math.floor((a >>> 0) / (b >>> 0));");
  }
  if (canonical == "rem_u" || canonical == "i64_rem_u") {
    return def("a, b", "return (a >>> 0) % (b >>> 0);");
  }
  if (canonical == "shr_u" || canonical == "i64_shr_u") {
    return def("a, n", "return a >>> n;");
  }
  if (canonical == "lt_u" || canonical == "i64_lt_u") {
    return def("a, b", "return (a >>> 0) < (b >>> 0);");
  }
  if (canonical == "gt_u" || canonical == "i64_gt_u") {
    return def("a, b", "return (a >>> 0) > (b >>> 0);");
  }
  if (canonical == "le_u" || canonical == "i64_le_u") {
    return def("a, b", "return (a >>> 0) <= (b >>> 0);");
  }
  if (canonical == "ge_u" || canonical == "i64_ge_u") {
    return def("a, b", "return (a >>> 0) >= (b >>> 0);");
  }
  if (canonical == "i64") return def("s", "return Number(s);");
  if (canonical == "memory_grow") return def("n", "return -1;");
  if (canonical == "i32_wrap_i64") return def("x", "return x | 0;");
  if (canonical == "i64_extend_i32_s") return def("x", "return x;");
  if (canonical == "i64_extend_i32_u") return def("x", "return x >>> 0;");
  if (canonical.rfind("i32_trunc_", 0) == 0) {
    if (canonical.back() == 'u') return def("x", "return Math.trunc(x) >>> 0;");
    return def("x", "return Math.trunc(x) | 0;");
  }
  if (canonical.rfind("i64_trunc_", 0) == 0) return def("x", "return Math.trunc(x);");
  if (canonical == "f32_demote_f64") return def("x", "return Math.fround(x);");
  if (canonical == "f64_promote_f32") return def("x", "return x;");
  if (canonical.rfind("f32_convert_", 0) == 0 || canonical.rfind("f64_convert_", 0) == 0) {
    if (canonical.back() == 'u') return def("x", "return x >>> 0;");
    return def("x", "return x;");
  }
  return def("x", "return x;");
}

}  // namespace

std::string helper_prelude(const std::map<std::string, std::string>& helpers_used) {
  std::string out;
  for (const auto& [actual, canonical] : helpers_used) {
    out += helper_source(canonical, actual);
  }
  return out;
}

}  // namespace jwbinder::ssr
