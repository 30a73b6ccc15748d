// SPDX-License-Identifier: Apache-2.0
#include "fhemesh/nop/net.hpp"

#include <algorithm>

namespace fhemesh::nop {

u64 NetConfig::link_bits_per_cycle() const {
  const u32 cut_links = std::min(mesh_x, mesh_y);
  return u64(bisection_gbps * 8.0 / clock_ghz / cut_links);
}

u64 NetConfig::hbm_bits_per_cycle() const { return u64(hbm_gbps_per_port * 8.0 / clock_ghz); }

void NetConfig::validate() const {
  if (mesh_x == 0 || mesh_y == 0) throw InvalidConfig("mesh dimensions must be positive");
  if (flit_bits == 0 || elem_bits == 0) throw InvalidConfig("flit and element widths must be positive");
  if (vcs == 0 || vc_buffer_flits == 0) throw InvalidConfig("need at least one virtual channel and buffer slot");
  if (hop_cycles == 0) throw InvalidConfig("router traversal must take at least one cycle");
  if (clock_ghz <= 0 || bisection_gbps <= 0 || hbm_gbps_per_port <= 0)
    throw InvalidConfig("clock and bandwidth figures must be positive");
  if (cores() > 1 && link_bits_per_cycle() == 0)
    throw InvalidConfig("per-link bandwidth rounds to zero bits per cycle");
  if (hbm_ports == 0 || hbm_ports > 4) throw InvalidConfig("memory ports must number 1..4");
}

void NopSim::Stage::push(u64 cycle, u64 flits) {
  if (!arrivals.empty() && arrivals.back().first == cycle) {
    arrivals.back().second += flits;
  } else {
    arrivals.push_back({cycle, flits});
  }
  pending += flits;
}

void NopSim::Stage::mature(u64 now) {
  while (head < arrivals.size() && arrivals[head].first <= now) {
    ready += arrivals[head].second;
    pending -= arrivals[head].second;
    ++head;
  }
  if (head == arrivals.size() && head > 0) {
    arrivals.clear();
    head = 0;
  }
}

NopSim::NopSim(const NetConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  const u64 mesh_rate = cfg_.link_bits_per_cycle();
  adj_.assign(cfg_.cores(), {kNoLink, kNoLink, kNoLink, kNoLink});

  const auto add_link = [&](u32 src, u32 dst, bool memory, u64 rate) {
    links_.push_back({src, dst, memory, rate, 0});
    return u32(links_.size() - 1);
  };
  for (u32 x = 0; x < cfg_.mesh_x; ++x)
    for (u32 y = 0; y < cfg_.mesh_y; ++y) {
      const u32 r = router_at(x, y);
      if (x + 1 < cfg_.mesh_x) {
        adj_[r][0] = add_link(r, router_at(x + 1, y), false, mesh_rate);
        adj_[router_at(x + 1, y)][1] = add_link(router_at(x + 1, y), r, false, mesh_rate);
      }
      if (y + 1 < cfg_.mesh_y) {
        adj_[r][2] = add_link(r, router_at(x, y + 1), false, mesh_rate);
        adj_[router_at(x, y + 1)][3] = add_link(router_at(x, y + 1), r, false, mesh_rate);
      }
    }
  for (u32 p = 0; p < cfg_.hbm_ports; ++p) {
    add_link(p, port_router(p), true, cfg_.hbm_bits_per_cycle());   // memory ingress
    add_link(port_router(p), p, true, cfg_.hbm_bits_per_cycle());   // memory egress
  }
  queues_.assign(links_.size(), std::vector<std::deque<QEntry>>(cfg_.vcs));
  stats_.link_flits.assign(links_.size(), 0);
  stats_.link_busy_cycles.assign(links_.size(), 0);
}

u32 NopSim::port_router(u32 port) const {
  switch (port) {
    case 0: return router_at(0, 0);
    case 1: return router_at(cfg_.mesh_x - 1, cfg_.mesh_y - 1);
    case 2: return router_at(0, cfg_.mesh_y - 1);
    default: return router_at(cfg_.mesh_x - 1, 0);
  }
}

u32 NopSim::nearest_port(u32 router) const {
  const u32 rx = router / cfg_.mesh_y, ry = router % cfg_.mesh_y;
  u32 best = 0, best_d = 0xffffffffu;
  for (u32 p = 0; p < cfg_.hbm_ports; ++p) {
    const u32 pr = port_router(p);
    const u32 px = pr / cfg_.mesh_y, py = pr % cfg_.mesh_y;
    const u32 d = (rx > px ? rx - px : px - rx) + (ry > py ? ry - py : py - ry);
    if (d < best_d) {
      best_d = d;
      best = p;
    }
  }
  return best;
}

std::vector<u32> NopSim::route(const Endpoint& src, const Endpoint& dst) const {
  std::vector<u32> links;
  u32 a, b;
  if (src.kind == Endpoint::Kind::Hbm) {
    const u32 port = src.idx == Endpoint::kNearestPort ? nearest_port(dst.idx) : src.idx;
    links.push_back(u32(links_.size() - 2 * cfg_.hbm_ports + 2 * port));  // ingress link
    a = port_router(port);
  } else {
    a = src.idx;
  }
  u32 egress = kNoLink;
  if (dst.kind == Endpoint::Kind::Hbm) {
    const u32 port = dst.idx == Endpoint::kNearestPort ? nearest_port(a) : dst.idx;
    egress = u32(links_.size() - 2 * cfg_.hbm_ports + 2 * port + 1);
    b = port_router(port);
  } else {
    b = dst.idx;
  }
  // dimension order: rows first, then columns
  u32 ax = a / cfg_.mesh_y, ay = a % cfg_.mesh_y;
  const u32 bx = b / cfg_.mesh_y, by = b % cfg_.mesh_y;
  while (ax != bx) {
    const u32 dir = bx > ax ? 0 : 1;
    links.push_back(adj_[router_at(ax, ay)][dir]);
    ax += bx > ax ? 1 : u32(-1);
  }
  while (ay != by) {
    const u32 dir = by > ay ? 2 : 3;
    links.push_back(adj_[router_at(ax, ay)][dir]);
    ay += by > ay ? 1 : u32(-1);
  }
  if (egress != kNoLink) links.push_back(egress);
  return links;
}

std::string NopSim::link_name(u32 link) const {
  const Link& l = links_.at(link);
  const auto router_str = [&](u32 r) {
    return "(" + std::to_string(r / cfg_.mesh_y) + "," + std::to_string(r % cfg_.mesh_y) + ")";
  };
  if (l.memory) {
    const bool ingress = (link - (links_.size() - 2 * cfg_.hbm_ports)) % 2 == 0;
    return ingress ? "hbm" + std::to_string(l.src_router) + "->" + router_str(l.dst_router)
                   : router_str(l.src_router) + "->hbm" + std::to_string(l.dst_router);
  }
  return router_str(l.src_router) + "->" + router_str(l.dst_router);
}

u64 NopSim::inject(const PacketDesc& d) {
  PacketDesc desc = d;
  if (desc.src.kind == Endpoint::Kind::Hbm && desc.src.idx == Endpoint::kNearestPort)
    desc.src.idx = nearest_port(desc.dst.idx);
  if (desc.dst.kind == Endpoint::Kind::Hbm && desc.dst.idx == Endpoint::kNearestPort)
    desc.dst.idx = nearest_port(desc.src.idx);
  if (desc.src.kind == Endpoint::Kind::Core && desc.src.idx >= cfg_.cores())
    throw InvalidConfig("packet source core out of range");
  if (desc.dst.kind == Endpoint::Kind::Core && desc.dst.idx >= cfg_.cores())
    throw InvalidConfig("packet destination core out of range");

  Flight f;
  f.desc = desc;
  f.id = stats_.packets_injected++;
  f.vc = desc.vc == PacketDesc::kAutoVc ? u32(next_vc_++ % cfg_.vcs) : desc.vc % cfg_.vcs;
  f.flits = std::max<u64>(1, ceil_div(desc.elements * cfg_.elem_bits, u64(cfg_.flit_bits)));
  f.inject_cycle = now_;
  f.route = route(desc.src, desc.dst);
  stats_.flits_injected += f.flits;

  if (f.route.empty()) {  // same-core transfer never enters the mesh
    completions_.push_back({f.id, desc, f.flits, f.vc, now_, now_ + cfg_.hop_cycles});
    stats_.packets_delivered++;
    stats_.flits_delivered += f.flits;
    flights_.push_back(std::move(f));
    return flights_.back().id;
  }
  f.stage.resize(f.route.size());
  f.crossed.assign(f.route.size(), 0);
  f.enqueued.assign(f.route.size(), 0);
  f.stage[0].ready = f.flits;
  flights_.push_back(std::move(f));
  ++in_flight_;
  enqueue_hop(flights_.size() - 1, 0);
  return flights_.back().id;
}

void NopSim::enqueue_hop(u64 pkt, u32 hop) {
  Flight& f = flights_[pkt];
  if (f.enqueued[hop]) return;
  f.enqueued[hop] = 1;
  queues_[f.route[hop]][f.vc].push_back({pkt, hop});
}

void NopSim::run_cycle() {
  for (u32 li = 0; li < links_.size(); ++li) {
    Link& link = links_[li];
    link.bucket = std::min(link.bucket + link.rate_bits, link.rate_bits + cfg_.flit_bits);
    bool moved_any = false;
    const u32 vstart = u32((now_ + li) % cfg_.vcs);
    for (u32 vi = 0; vi < cfg_.vcs; ++vi) {
      auto& q = queues_[li][(vstart + vi) % cfg_.vcs];
      while (!q.empty()) {
        const u64 cap_flits = link.bucket / cfg_.flit_bits;
        if (cap_flits == 0) break;
        const QEntry ent = q.front();
        Flight& f = flights_[ent.pkt];
        if (f.crossed[ent.hop] == f.flits) {  // finished this link earlier
          q.pop_front();
          continue;
        }
        Stage& st = f.stage[ent.hop];
        st.mature(now_);
        if (st.ready == 0) break;  // wormhole: wait for flits in flight
        u64 space = ~u64(0);
        if (ent.hop + 1 < f.route.size()) {
          Stage& dn = f.stage[ent.hop + 1];
          dn.mature(now_);
          space = dn.total() >= cfg_.vc_buffer_flits ? 0 : cfg_.vc_buffer_flits - dn.total();
        }
        const u64 move = std::min({st.ready, cap_flits, space});
        if (move == 0) break;  // credit backpressure
        st.ready -= move;
        f.crossed[ent.hop] += move;
        link.bucket -= move * cfg_.flit_bits;
        stats_.link_flits[li] += move;
        stats_.flit_hops += move;
        moved_any = true;
        const u64 latency = link.memory ? cfg_.hbm_latency : cfg_.hop_cycles;
        if (ent.hop + 1 == f.route.size()) {
          if (f.crossed[ent.hop] == f.flits) {
            completions_.push_back(
                {f.id, f.desc, f.flits, f.vc, f.inject_cycle, now_ + latency});
            stats_.packets_delivered++;
            stats_.flits_delivered += f.flits;
            --in_flight_;
            q.pop_front();
            continue;
          }
        } else {
          f.stage[ent.hop + 1].push(now_ + latency, move);
          enqueue_hop(ent.pkt, ent.hop + 1);
          if (f.crossed[ent.hop] == f.flits) {
            q.pop_front();
            continue;
          }
        }
        if (st.ready == 0) break;  // rest of the train still upstream
      }
    }
    if (moved_any) stats_.link_busy_cycles[li]++;
  }
  ++now_;
  stats_.cycles = now_;
}

void NopSim::step(u64 cycles) {
  for (u64 i = 0; i < cycles; ++i) run_cycle();
}

void NopSim::advance_idle(u64 to_cycle) {
  if (in_flight_ != 0) throw InvalidConfig("cannot skip cycles with packets in flight");
  if (to_cycle <= now_) return;
  now_ = to_cycle;
  stats_.cycles = now_;
}

u64 NopSim::drain(u64 max_cycles) {
  const u64 limit = now_ + max_cycles;
  while (in_flight_ > 0) {
    if (now_ >= limit) throw InvalidConfig("network failed to drain");
    run_cycle();
  }
  u64 last = now_;
  for (const auto& c : completions_) last = std::max(last, c.deliver_cycle);
  now_ = last;
  stats_.cycles = now_;
  return now_;
}

}  // namespace fhemesh::nop
