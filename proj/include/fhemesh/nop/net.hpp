// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <deque>
#include <string>
#include <vector>

#include "fhemesh/common.hpp"

namespace fhemesh::nop {

// Package interconnect: a 2D mesh of routers (one per core) with
// dimension-ordered routing, virtual-channel flow control modeled by flit
// counters, token-bucket link bandwidth, and memory ports on two corners.
struct NetConfig {
  u32 mesh_x = 4;
  u32 mesh_y = 4;
  u32 flit_bits = 256;
  u32 elem_bits = 32;
  u32 vcs = 4;
  u32 vc_buffer_flits = 16;  // credit pool per (link, vc)
  u32 hop_cycles = 3;        // router traversal pipeline depth
  double clock_ghz = 1.0;
  double bisection_gbps = 2000.0;   // package bisection bandwidth, GB/s
  double hbm_gbps_per_port = 500.0; // memory bandwidth per edge port, GB/s
  u32 hbm_ports = 2;
  u64 hbm_latency = 100;  // cycles per memory-port traversal

  u32 cores() const { return mesh_x * mesh_y; }
  // Links crossing the narrowest bisection cut share the package budget.
  u64 link_bits_per_cycle() const;
  u64 hbm_bits_per_cycle() const;
  void validate() const;
};

struct Endpoint {
  enum class Kind : u8 { Core, Hbm };
  static constexpr u32 kNearestPort = 0xffffffffu;

  Kind kind = Kind::Core;
  u32 idx = 0;

  static Endpoint core(u32 c) { return {Kind::Core, c}; }
  static Endpoint hbm(u32 port) { return {Kind::Hbm, port}; }
  // Resolved at injection to the memory port closest to the other endpoint.
  static Endpoint hbm_nearest() { return {Kind::Hbm, kNearestPort}; }
  bool operator==(const Endpoint&) const = default;
};

struct PacketDesc {
  Endpoint src;
  Endpoint dst;
  u64 elements = 0;
  u32 vc = kAutoVc;  // kAutoVc -> assigned round-robin by injection order
  u64 tag = 0;       // caller-defined grouping (phase, limb, ...)

  static constexpr u32 kAutoVc = 0xffffffffu;
};

struct Completion {
  u64 id = 0;
  PacketDesc desc;
  u64 flits = 0;
  u32 vc = 0;
  u64 inject_cycle = 0;
  u64 deliver_cycle = 0;
};

struct NopStats {
  u64 cycles = 0;
  u64 packets_injected = 0;
  u64 packets_delivered = 0;
  u64 flits_injected = 0;
  u64 flits_delivered = 0;
  u64 flit_hops = 0;                  // sum of per-link forwarded flits
  std::vector<u64> link_flits;        // per directed link
  std::vector<u64> link_busy_cycles;  // cycles with at least one flit forwarded
};

class NopSim {
 public:
  explicit NopSim(const NetConfig& cfg);

  u64 inject(const PacketDesc& d);
  void step(u64 cycles = 1);
  // Jumps the clock forward without simulating; only legal while idle.
  void advance_idle(u64 to_cycle);
  // Advances until every injected packet is delivered; throws InvalidConfig
  // if the network fails to drain within max_cycles.
  u64 drain(u64 max_cycles = u64(1) << 40);

  bool idle() const { return in_flight_ == 0; }
  u64 now() const { return now_; }
  const NetConfig& config() const { return cfg_; }
  const NopStats& stats() const { return stats_; }
  const std::vector<Completion>& completions() const { return completions_; }

  u32 link_count() const { return u32(links_.size()); }
  // Human-readable endpoint description of one directed link.
  std::string link_name(u32 link) const;
  // Directed link sequence taken by a packet (dimension-ordered: rows, then
  // columns; memory packets enter/leave at the nearest corner port).
  std::vector<u32> route(const Endpoint& src, const Endpoint& dst) const;

 private:
  struct Link {
    u32 src_router = 0;  // router attached upstream (or port id for memory)
    u32 dst_router = 0;
    bool memory = false;
    u64 rate_bits = 0;
    u64 bucket = 0;
  };

  // Flits waiting to cross one link of one packet's route; arrivals mature
  // after the upstream traversal delay.
  struct Stage {
    u64 ready = 0;
    u64 pending = 0;
    u32 head = 0;
    std::vector<std::pair<u64, u64>> arrivals;  // (mature cycle, flits)

    void push(u64 cycle, u64 flits);
    void mature(u64 now);
    u64 total() const { return ready + pending; }
  };

  struct Flight {
    PacketDesc desc;
    u64 id = 0;
    u32 vc = 0;
    u64 flits = 0;
    u64 inject_cycle = 0;
    std::vector<u32> route;
    std::vector<Stage> stage;     // one per hop
    std::vector<u64> crossed;     // flits already past each hop
    std::vector<u8> enqueued;     // per hop
  };

  struct QEntry {
    u64 pkt;
    u32 hop;
  };

  static constexpr u32 kNoLink = 0xffffffffu;

  u32 router_at(u32 x, u32 y) const { return x * cfg_.mesh_y + y; }
  u32 port_router(u32 port) const;
  u32 nearest_port(u32 router) const;
  void enqueue_hop(u64 pkt, u32 hop);
  void run_cycle();

  NetConfig cfg_;
  std::vector<Link> links_;
  std::vector<std::array<u32, 4>> adj_;               // [router][dir] -> link
  std::vector<std::vector<std::deque<QEntry>>> queues_;  // [link][vc]
  std::vector<Flight> flights_;
  NopStats stats_;
  std::vector<Completion> completions_;
  u64 now_ = 0;
  u64 in_flight_ = 0;
  u64 next_vc_ = 0;
};

}  // namespace fhemesh::nop
