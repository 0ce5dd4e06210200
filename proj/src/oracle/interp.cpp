#include "jwbinder/oracle/interp.hpp"

#include <cstring>

namespace jwbinder::oracle {

using wasm::Instruction;
using wasm::Op;
using wasm::ValType;
using wasm::WasmModule;

namespace {

constexpr size_t kPageSize = 65536;

struct Machine {
  const WasmModule& module;
  const std::map<uint32_t, HostStub>& host;
  InterpOptions options;

  std::vector<uint8_t> memory;
  std::vector<std::optional<uint32_t>> table;  // slot -> function index
  std::vector<Value> globals;
  std::vector<Value> stack;
  HostTrace trace;
  uint64_t fuel;
  size_t call_depth = 0;
  size_t host_ordinal = 0;

  explicit Machine(const WasmModule& m, const std::map<uint32_t, HostStub>& h,
                   const InterpOptions& opt)
      : module(m), host(h), options(opt), fuel(opt.fuel) {
    memory = initial_memory(m);
    uint32_t table_size = m.tables.empty() ? 0 : m.tables[0].min;
    table.assign(table_size, std::nullopt);
    for (const wasm::ElementSegment& seg : m.elements) {
      if (!seg.const_offset) continue;
      for (size_t j = 0; j < seg.func_indices.size(); ++j) {
        size_t slot = *seg.const_offset + j;
        if (slot < table.size()) table[slot] = seg.func_indices[j];
      }
    }
    for (const wasm::Global& g : m.globals) {
      Value v = Value::zero_of(g.type);
      if (g.init.size() == 1) {
        const Instruction& init = g.init[0];
        switch (init.op) {
          case Op::I32Const: v = Value::make_i32(static_cast<int32_t>(init.i64_val)); break;
          case Op::I64Const: v = Value::make_i64(init.i64_val); break;
          case Op::F32Const: v = Value::make_f32(init.f32_val); break;
          case Op::F64Const: v = Value::make_f64(init.f64_val); break;
          default: break;
        }
      }
      globals.push_back(v);
    }
  }

  void burn(uint64_t n = 1) {
    if (fuel < n) throw EvalTrap{TrapKind::Fuel};
    fuel -= n;
  }

  Value pop() {
    Value v = stack.back();
    stack.pop_back();
    return v;
  }

  // Control outcome of a nested run.
  struct Ctl {
    enum Kind { Next, Branch, Return } kind = Next;
    uint32_t depth = 0;  // for Branch
  };

  uint64_t effective_addr(int32_t base, uint32_t offset, size_t width) {
    uint64_t addr = static_cast<uint64_t>(static_cast<uint32_t>(base)) + offset;
    if (addr + width > memory.size()) throw EvalTrap{TrapKind::OobMemory};
    return addr;
  }

  Value load(const Instruction& instr, int32_t base) {
    auto rd = [&](size_t width) {
      uint64_t addr = effective_addr(base, instr.b, width);
      uint64_t v = 0;
      for (size_t i = 0; i < width; ++i) v |= static_cast<uint64_t>(memory[addr + i]) << (8 * i);
      return v;
    };
    switch (instr.op) {
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
      default: throw EvalTrap{TrapKind::Unreachable};
    }
  }

  void store(const Instruction& instr, int32_t base, const Value& v) {
    auto wr = [&](size_t width, uint64_t bits) {
      uint64_t addr = effective_addr(base, instr.b, width);
      for (size_t i = 0; i < width; ++i) memory[addr + i] = static_cast<uint8_t>(bits >> (8 * i));
    };
    switch (instr.op) {
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
      default: throw EvalTrap{TrapKind::Unreachable};
    }
  }

  std::optional<Value> invoke(uint32_t func_index, std::vector<Value> args) {
    if (++call_depth > options.max_call_depth) throw EvalTrap{TrapKind::Fuel};
    const wasm::FuncType& sig = module.func_type(func_index);

    if (module.is_imported_func(func_index)) {
      const wasm::Import& imp = module.func_import(func_index);
      auto it = host.find(func_index);
      HostStub fallback{imp.module + "." + imp.field,
                        sig.results.empty() ? std::nullopt
                                            : std::make_optional(sig.results[0]),
                        nullptr};
      const HostStub& stub = it == host.end() ? fallback : it->second;
      trace.calls.push_back({stub.label, args});
      Value result = stub.invoke(host_ordinal++, args);
      --call_depth;
      if (sig.results.empty()) return std::nullopt;
      result.type = sig.results[0];
      return result;
    }

    const wasm::Function& fn = module.defined_func(func_index);
    if (!fn.body_ok) throw EvalTrap{TrapKind::Unreachable};
    std::vector<Value> locals = std::move(args);
    for (ValType t : fn.locals) locals.push_back(Value::zero_of(t));

    size_t frame_base = stack.size();
    Ctl ctl = exec(fn.body, locals);
    std::optional<Value> result;
    if (!sig.results.empty()) {
      result = pop();
    }
    stack.resize(frame_base);
    --call_depth;
    (void)ctl;
    return result;
  }

  // Executes a structured instruction sequence. Returns how control left it.
  Ctl exec(const std::vector<Instruction>& instrs, std::vector<Value>& locals) {
    for (const Instruction& instr : instrs) {
      burn();
      switch (instr.op) {
        case Op::Nop:
          break;
        case Op::Unreachable:
          throw EvalTrap{TrapKind::Unreachable};
        case Op::Drop:
          pop();
          break;
        case Op::Select: {
          Value c = pop(), b = pop(), a = pop();
          stack.push_back(c.truthy() ? a : b);
          break;
        }
        case Op::LocalGet:
          stack.push_back(locals[instr.a]);
          break;
        case Op::LocalSet:
          locals[instr.a] = pop();
          break;
        case Op::LocalTee:
          locals[instr.a] = stack.back();
          break;
        case Op::GlobalGet: {
          if (instr.a >= globals.size()) {
            stack.push_back(Value::make_i32(0));  // imported global modeled as 0
          } else {
            stack.push_back(globals[instr.a]);
          }
          break;
        }
        case Op::GlobalSet: {
          Value v = pop();
          if (instr.a < globals.size()) globals[instr.a] = v;
          break;
        }
        case Op::I32Const:
          stack.push_back(Value::make_i32(static_cast<int32_t>(instr.i64_val)));
          break;
        case Op::I64Const:
          stack.push_back(Value::make_i64(instr.i64_val));
          break;
        case Op::F32Const:
          stack.push_back(Value::make_f32(instr.f32_val));
          break;
        case Op::F64Const:
          stack.push_back(Value::make_f64(instr.f64_val));
          break;
        case Op::MemorySize:
          stack.push_back(Value::make_i32(static_cast<int32_t>(memory.size() / kPageSize)));
          break;
        case Op::MemoryGrow: {
          Value n = pop();
          uint64_t current = memory.size() / kPageSize;
          uint64_t want = current + static_cast<uint32_t>(n.i32);
          if (n.i32 < 0 || want > options.max_pages) {
            stack.push_back(Value::make_i32(-1));
          } else {
            memory.resize(want * kPageSize, 0);
            stack.push_back(Value::make_i32(static_cast<int32_t>(current)));
          }
          break;
        }
        case Op::Block: {
          size_t entry = stack.size();
          Ctl ctl = exec(instr.body, locals);
          if (ctl.kind == Ctl::Return) return ctl;
          if (ctl.kind == Ctl::Branch) {
            if (ctl.depth > 0) return {Ctl::Branch, ctl.depth - 1};
            unwind(entry, instr.block_result);
          }
          break;
        }
        case Op::Loop: {
          for (;;) {
            burn();
            size_t entry = stack.size();
            Ctl ctl = exec(instr.body, locals);
            if (ctl.kind == Ctl::Return) return ctl;
            if (ctl.kind == Ctl::Next) break;
            if (ctl.depth > 0) return {Ctl::Branch, ctl.depth - 1};
            stack.resize(entry);  // branch to loop start carries nothing
          }
          break;
        }
        case Op::If: {
          Value cond = pop();
          size_t entry = stack.size();
          Ctl ctl = cond.truthy() ? exec(instr.body, locals) : exec(instr.else_body, locals);
          if (ctl.kind == Ctl::Return) return ctl;
          if (ctl.kind == Ctl::Branch) {
            if (ctl.depth > 0) return {Ctl::Branch, ctl.depth - 1};
            unwind(entry, instr.block_result);
          }
          break;
        }
        case Op::Br:
          return {Ctl::Branch, instr.a};
        case Op::BrIf: {
          Value cond = pop();
          if (cond.truthy()) return {Ctl::Branch, instr.a};
          break;
        }
        case Op::BrTable: {
          Value idx = pop();
          uint32_t i = static_cast<uint32_t>(idx.i32);
          uint32_t depth = i < instr.table.size() ? instr.table[i] : instr.a;
          return {Ctl::Branch, depth};
        }
        case Op::Return:
          return {Ctl::Return, 0};
        case Op::Call: {
          const wasm::FuncType& sig = module.func_type(instr.a);
          std::vector<Value> args(sig.params.size());
          for (size_t i = 0; i < args.size(); ++i) args[args.size() - 1 - i] = pop();
          auto result = invoke(instr.a, std::move(args));
          if (result) stack.push_back(*result);
          break;
        }
        case Op::CallIndirect: {
          Value idx = pop();
          uint32_t slot = static_cast<uint32_t>(idx.i32);
          if (slot >= table.size() || !table[slot]) throw EvalTrap{TrapKind::BadIndirect};
          uint32_t func = *table[slot];
          if (!(module.func_type(func) == module.types.at(instr.a))) {
            throw EvalTrap{TrapKind::BadIndirect};
          }
          const wasm::FuncType& sig = module.types.at(instr.a);
          std::vector<Value> args(sig.params.size());
          for (size_t i = 0; i < args.size(); ++i) args[args.size() - 1 - i] = pop();
          auto result = invoke(func, std::move(args));
          if (result) stack.push_back(*result);
          break;
        }
        default: {
          if (auto lr = [&] {
                switch (instr.op) {
                  case Op::I32Load: case Op::I64Load: case Op::F32Load: case Op::F64Load:
                  case Op::I32Load8S: case Op::I32Load8U: case Op::I32Load16S:
                  case Op::I32Load16U: case Op::I64Load8S: case Op::I64Load8U:
                  case Op::I64Load16S: case Op::I64Load16U: case Op::I64Load32S:
                  case Op::I64Load32U:
                    return 1;
                  case Op::I32Store: case Op::I64Store: case Op::F32Store: case Op::F64Store:
                  case Op::I32Store8: case Op::I32Store16: case Op::I64Store8:
                  case Op::I64Store16: case Op::I64Store32:
                    return 2;
                  default:
                    return 0;
                }
              }()) {
            if (lr == 1) {
              Value base = pop();
              stack.push_back(load(instr, base.i32));
            } else {
              Value v = pop();
              Value base = pop();
              store(instr, base.i32, v);
            }
            break;
          }
          auto sig = wasm::value_op_signature(instr.op);
          if (!sig) throw EvalTrap{TrapKind::Unreachable};
          std::vector<Value> args(sig->params.size());
          for (size_t i = 0; i < args.size(); ++i) args[args.size() - 1 - i] = pop();
          stack.push_back(apply_value_op(instr.op, args));
          break;
        }
      }
    }
    return {Ctl::Next, 0};
  }

  // Normalizes the stack when a branch exits a block carrying a result.
  void unwind(size_t entry, std::optional<ValType> result) {
    if (result) {
      Value v = pop();
      stack.resize(entry);
      stack.push_back(v);
    } else {
      stack.resize(entry);
    }
  }
};

}  // namespace

std::vector<uint8_t> initial_memory(const WasmModule& module) {
  uint32_t pages = module.memories.empty() ? 0 : module.memories[0].min;
  std::vector<uint8_t> memory(static_cast<size_t>(pages) * kPageSize, 0);
  for (const wasm::DataSegment& seg : module.data_segments) {
    if (!seg.const_offset) continue;
    size_t offset = *seg.const_offset;
    if (offset + seg.bytes.size() > memory.size()) continue;
    std::copy(seg.bytes.begin(), seg.bytes.end(), memory.begin() + static_cast<long>(offset));
  }
  return memory;
}

RunResult interp_wasm(const WasmModule& module, uint32_t func_index,
                      const std::vector<Value>& args, const std::map<uint32_t, HostStub>& host,
                      const InterpOptions& options) {
  RunResult result;
  Machine machine(module, host, options);
  try {
    auto value = machine.invoke(func_index, args);
    if (value) result.value = *value;
  } catch (const EvalTrap& trap) {
    result.trap = trap.kind;
  }
  result.trace = std::move(machine.trace);
  return result;
}

}  // namespace jwbinder::oracle
