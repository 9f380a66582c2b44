#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "qkdnar/keyrate.hpp"
#include "qkdnar/route.hpp"

namespace qkdnar {

enum class RealizationKind { OB, TR, QKP };

std::string_view to_string(RealizationKind k);

// One channel segment: a lightpath on a single wavelength end to end.
struct Hop {
  Route route;
  int wavelength = -1;

  bool operator==(const Hop&) const = default;
};

// How a request (or the key cache of a pair) receives keys in one slot.
struct Realization {
  int id = -1;          // handle assigned by NetworkState
  int request_id = -1;  // -1 marks a caching channel that only fills `pair`'s pool
  NodePair pair;
  int slot = 0;
  RealizationKind kind = RealizationKind::OB;
  std::vector<Hop> hops;       // OB: one hop; TR: one per relay segment; QKP: none
  double amount_kbslot = 0.0;  // QKP draws only
  double delivered_kbps = 0.0;

  bool is_channel() const { return kind != RealizationKind::QKP; }
  bool is_cache() const { return request_id < 0; }
  int module_cost() const { return 2 * static_cast<int>(hops.size()); }
  double km() const;

  // Mode plus node sequence, e.g. "TR:A-E-D-C". Wavelengths are ignored.
  std::string signature(const Topology& topo) const;
};

enum class Refusal {
  None,
  NoWavelength,
  ModuleBudget,
  ZeroRate,
  InsufficientKeys,
  WavelengthTaken,
  BadRoute,
};

std::string_view to_string(Refusal r);

struct Allocation {
  std::optional<Realization> realization;
  Refusal refusal = Refusal::None;

  explicit operator bool() const { return realization.has_value(); }
  const Realization& operator*() const { return *realization; }
  const Realization* operator->() const { return &*realization; }
};

// QKP balance movement of one pair over one slot, in kb*slot.
struct QkpLedgerEntry {
  int slot = 0;
  NodePair pair;
  double opening = 0.0;
  double deposited = 0.0;
  double drawn = 0.0;
  double closing = 0.0;
};

// Key pools are kept in integer micro-kb so that the ledger identity
// closing = opening + deposited - drawn holds exactly.
using KeyUnits = std::int64_t;
KeyUnits to_units(double kb);
double from_units(KeyUnits u);

// Resources of the current slot plus the key pools that carry across slots.
// Single writer; copies are independent.
class NetworkState {
 public:
  NetworkState(const Topology& topo, const KeyRateTable& rates, double qkp_capacity_kbslot);

  int slot() const { return slot_; }
  const Topology& topology() const { return *topo_; }
  const KeyRateTable& key_rates() const { return *rates_; }
  double qkp_capacity() const { return from_units(capacity_); }

  // First-fit wavelength common to every link of the route. One module at
  // each end.
  Allocation try_allocate_ob(int request_id, const Route& route);

  // Independent first-fit wavelength per hop. One module at each chain end,
  // two at every relay. All-or-nothing.
  Allocation try_allocate_tr(int request_id, std::span<const Route> hops);

  // Re-installs a channel realization on the wavelengths it names. Keeps the
  // realization id when it is not in use. Used for replay and for undo.
  Allocation allocate_exact(const Realization& r);

  Allocation draw_qkp(int request_id, NodePair pair, double amount_kbslot);

  // Adds up to the pool's headroom; returns what was actually stored.
  double deposit_qkp(NodePair pair, double amount_kbslot);

  // Exact inverse of the allocation or draw that produced `r`. Throws
  // std::invalid_argument for a realization that is not active.
  void release(const Realization& r);

  // Closes the slot: records the ledger, frees channels and modules.
  void advance_slot();

  int occupant(LinkId e, int wavelength) const;  // realization id or -1
  int free_wavelengths(LinkId e) const;
  int modules_used(NodeId n) const { return modules_.at(n); }
  int total_modules_used() const;
  double qkp_balance(NodePair pair) const;
  double qkp_total() const;
  bool is_active(int realization_id) const { return active_.count(realization_id) != 0; }
  std::size_t active_count() const { return active_.size(); }

  // Closed slots, ordered by slot then pair.
  const std::vector<QkpLedgerEntry>& ledger() const { return ledger_; }

  // Same resources, pools and active set (ignores the id counter and ledger).
  bool same_resources(const NetworkState& o) const;

 private:
  struct Pool {
    KeyUnits base = 0;  // opening balance plus this slot's deposits
    KeyUnits opening = 0;
    KeyUnits deposited = 0;
    std::vector<std::pair<int, KeyUnits>> draws;  // (realization id, amount)

    KeyUnits balance() const;
  };

  Allocation install(Realization r, bool keep_id);
  int& occ(LinkId e, int w) { return occupancy_[static_cast<std::size_t>(e) * channels_ + w]; }
  int occ(LinkId e, int w) const { return occupancy_[static_cast<std::size_t>(e) * channels_ + w]; }
  int first_fit(const Route& route) const;

  const Topology* topo_;
  const KeyRateTable* rates_;
  KeyUnits capacity_;
  int channels_;
  int slot_ = 0;
  int next_id_ = 0;
  std::vector<int> occupancy_;
  std::vector<int> modules_;
  std::map<NodePair, Pool> pools_;
  std::unordered_map<int, Realization> active_;
  std::vector<QkpLedgerEntry> ledger_;
};

}  // namespace qkdnar
