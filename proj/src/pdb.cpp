#include "fips/pdb.hpp"

namespace fips {

bool mass_at_least(std::uint64_t num, std::uint64_t den, std::int64_t ppb) {
  using u128 = unsigned __int128;
  return static_cast<u128>(num) * static_cast<u128>(kPpbOne) >=
         static_cast<u128>(ppb) * static_cast<u128>(den);
}

Pdb allocate_pdb(const DelayHistogram& hist, std::int64_t rel_ppb) {
  if (rel_ppb <= 0 || rel_ppb > kPpbOne)
    throw Error(ErrorCode::UnreachableReliability, "reliability outside (0, 1]");
  std::uint64_t cum = 0;
  for (const Bin& b : hist.bins()) {
    cum += b.count;
    if (mass_at_least(cum, hist.total(), rel_ppb)) return Pdb{{hist.min(), b.up}, cum, hist.total()};
  }
  throw Error(ErrorCode::UnreachableReliability, "histogram mass below requested reliability");
}

Pdb pdb_for_link(const NetworkGraph& g, int link, const Stream& stream) {
  const Link& l = g.links.at(static_cast<std::size_t>(link));
  if (l.is_wireless()) return allocate_pdb(g.histogram_of(l), stream.rel_ppb);
  return Pdb{ethernet_delay(l, stream.size_bytes), 1, 1};
}

TimeNs scalar_delay(const DelayHistogram& hist, ScalarMode mode) {
  if (mode == ScalarMode::Maximum) return hist.max();
  return allocate_pdb(hist, kPpbOne / 2).dmax();
}

}  // namespace fips
