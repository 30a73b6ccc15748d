// SPDX-License-Identifier: Apache-2.0
#include "fhemesh/sched/workload.hpp"

#include <map>
#include <sstream>

namespace fhemesh::sched {

const char* op_name(OpKind k) {
  switch (k) {
    case OpKind::HAdd: return "hadd";
    case OpKind::HMult: return "hmult";
    case OpKind::PAdd: return "padd";
    case OpKind::PMult: return "pmult";
    case OpKind::HRot: return "hrot";
    case OpKind::Rescale: return "rescale";
  }
  return "?";
}

namespace {

[[noreturn]] void bad_line(size_t line, const std::string& why) {
  throw MalformedTrace("trace line " + std::to_string(line) + ": " + why);
}

u32 parse_reg(const std::string& tok, size_t line) {
  if (tok.size() < 2 || tok[0] != '%') bad_line(line, "expected register, got '" + tok + "'");
  try {
    return u32(std::stoul(tok.substr(1)));
  } catch (const std::exception&) {
    bad_line(line, "bad register '" + tok + "'");
  }
}

u32 parse_level(const std::string& tok, size_t line) {
  if (tok.size() < 2 || tok[0] != '@') bad_line(line, "expected @level, got '" + tok + "'");
  try {
    const unsigned long v = std::stoul(tok.substr(1));
    if (v == 0) bad_line(line, "level must be positive");
    return u32(v);
  } catch (const MalformedTrace&) {
    throw;
  } catch (const std::exception&) {
    bad_line(line, "bad level '" + tok + "'");
  }
}

}  // namespace

std::vector<HeOp> parse_trace(const std::string& text) {
  std::vector<HeOp> ops;
  std::istringstream in(text);
  std::string raw;
  size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    std::istringstream ls(raw);
    std::string verb;
    if (!(ls >> verb)) continue;

    HeOp op;
    if (verb == "hadd")
      op.kind = OpKind::HAdd;
    else if (verb == "hmult")
      op.kind = OpKind::HMult;
    else if (verb == "padd")
      op.kind = OpKind::PAdd;
    else if (verb == "pmult")
      op.kind = OpKind::PMult;
    else if (verb == "hrot")
      op.kind = OpKind::HRot;
    else if (verb == "rescale")
      op.kind = OpKind::Rescale;
    else
      bad_line(lineno, "unknown op '" + verb + "'");

    std::string tok;
    if (!(ls >> tok)) bad_line(lineno, "missing destination");
    op.dst = parse_reg(tok, lineno);
    if (!(ls >> tok)) bad_line(lineno, "missing operand");
    op.a = parse_reg(tok, lineno);
    if (op.binary()) {
      if (!(ls >> tok)) bad_line(lineno, "missing second operand");
      op.b = parse_reg(tok, lineno);
    } else if (op.kind == OpKind::HRot) {
      if (!(ls >> tok)) bad_line(lineno, "missing rotation step");
      try {
        op.rot = std::stoll(tok);
      } catch (const std::exception&) {
        bad_line(lineno, "bad rotation step '" + tok + "'");
      }
    }
    if (!(ls >> tok)) bad_line(lineno, "missing @level");
    op.level = parse_level(tok, lineno);
    if (ls >> tok) bad_line(lineno, "trailing token '" + tok + "'");
    ops.push_back(op);
  }
  return ops;
}

std::string emit_trace(const std::vector<HeOp>& ops) {
  std::ostringstream out;
  for (const auto& op : ops) {
    out << op_name(op.kind) << " %" << op.dst << " %" << op.a;
    if (op.binary()) out << " %" << op.b;
    if (op.kind == OpKind::HRot) out << ' ' << op.rot;
    out << " @" << op.level << '\n';
  }
  return out.str();
}

std::vector<std::pair<u32, u32>> trace_inputs(const std::vector<HeOp>& ops) {
  std::map<u32, u32> reg_level;  // current level of each defined register
  std::vector<std::pair<u32, u32>> inputs;
  // An operand above the op level is aligned down for free (limbs dropped in
  // place); an operand below it has too few limbs and is an error.
  const auto use = [&](u32 reg, u32 level, size_t idx) {
    auto it = reg_level.find(reg);
    if (it == reg_level.end()) {
      inputs.emplace_back(reg, level);
      reg_level[reg] = level;
    } else if (it->second < level) {
      throw MalformedTrace("op " + std::to_string(idx) + ": %" + std::to_string(reg) +
                           " is at level " + std::to_string(it->second) + ", op expects " +
                           std::to_string(level));
    }
  };
  for (size_t i = 0; i < ops.size(); ++i) {
    const auto& op = ops[i];
    if (op.kind == OpKind::Rescale && op.level < 2)
      throw MalformedTrace("op " + std::to_string(i) + ": rescale needs level >= 2");
    use(op.a, op.level, i);
    if (op.binary()) use(op.b, op.level, i);
    reg_level[op.dst] = op.kind == OpKind::Rescale ? op.level - 1 : op.level;
  }
  return inputs;
}

WorkloadKind parse_workload_kind(const std::string& name) {
  if (name == "ks-micro") return WorkloadKind::KsMicro;
  if (name == "boot-like") return WorkloadKind::BootLike;
  if (name == "sweep-unit") return WorkloadKind::SweepUnit;
  throw InvalidConfig("unknown workload '" + name + "' (ks-micro | boot-like | sweep-unit)");
}

std::vector<HeOp> gen_workload(WorkloadKind kind, u32 level, u64 seed) {
  if (level == 0) throw InvalidConfig("workload level must be positive");
  std::vector<HeOp> ops;
  u32 next = 2;  // %0, %1 are external inputs
  const auto emit = [&ops, &next](OpKind k, u32 a, u32 b, i64 rot, u32 lv) {
    HeOp op;
    op.kind = k;
    op.dst = next++;
    op.a = a;
    op.b = b;
    op.rot = rot;
    op.level = lv;
    ops.push_back(op);
    return op.dst;
  };

  switch (kind) {
    case WorkloadKind::KsMicro: {
      emit(OpKind::HMult, 0, 1, 0, level);
      break;
    }
    case WorkloadKind::SweepUnit: {
      u32 r = emit(OpKind::HMult, 0, 1, 0, level);
      r = emit(OpKind::HRot, r, 0, 1 + i64(seed % 7), level);
      if (level >= 2) emit(OpKind::Rescale, r, 0, 0, level);
      break;
    }
    case WorkloadKind::BootLike: {
      // rotation ladders (slot/coefficient conversions are rotation-heavy)
      u32 cur = 0;
      u32 lv = level;
      for (u32 stage = 0; stage < 3 && lv >= 2; ++stage, --lv) {
        for (u32 k = 0; k < 6; ++k) {
          const i64 step = (i64(1) << k) * ((seed >> k) % 2 == 0 ? 1 : -1);
          cur = emit(OpKind::HRot, cur, 0, step, lv);
        }
        cur = emit(OpKind::HMult, cur, 1, 0, lv);
      }
      // squaring ladder (polynomial-evaluation shape)
      for (u32 i = 0; i < 8 && lv >= 2; ++i) {
        cur = emit(OpKind::HMult, cur, cur, 0, lv);
        if (i % 2 == 1) --lv;
      }
      // payload: multiply/rescale pairs on the refreshed budget
      const u32 pairs = std::min<u32>(9, lv > 1 ? lv - 1 : 0);
      for (u32 p = 0; p < pairs; ++p, --lv) {
        cur = emit(OpKind::HMult, cur, cur, 0, lv);
        cur = emit(OpKind::Rescale, cur, 0, 0, lv);
      }
      break;
    }
  }
  return ops;
}

}  // namespace fhemesh::sched
