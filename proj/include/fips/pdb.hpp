#pragma once

#include "fips/model.hpp"

namespace fips {

struct Pdb {
  Interval interval;
  // Covered mass as an exact fraction of the histogram total.
  std::uint64_t mass_num = 1;
  std::uint64_t mass_den = 1;

  TimeNs dmin() const { return interval.lo; }
  TimeNs dmax() const { return interval.hi; }
  bool operator==(const Pdb&) const = default;
};

Pdb allocate_pdb(const DelayHistogram& hist, std::int64_t rel_ppb);
Pdb pdb_for_link(const NetworkGraph& g, int link, const Stream& stream);

enum class ScalarMode { Median, Maximum };

TimeNs scalar_delay(const DelayHistogram& hist, ScalarMode mode);

// Exact comparison num/den >= ppb/1e9.
bool mass_at_least(std::uint64_t num, std::uint64_t den, std::int64_t ppb);

}  // namespace fips
