#include "fips/baselines.hpp"

namespace fips {

ScheduleResult schedule_scalar(const NetworkGraph& g, const std::vector<Stream>& streams, ScalarMode mode) {
  ScheduleOptions opt;
  opt.mode = mode == ScalarMode::Median ? Mode::Med : Mode::Max;
  opt.merge = false;
  opt.policing = false;
  opt.pdb = [mode](const NetworkGraph& net, int link, const Stream& s) {
    const Link& l = net.links.at(static_cast<std::size_t>(link));
    if (!l.is_wireless()) return pdb_for_link(net, link, s);
    const TimeNs d = scalar_delay(net.histogram_of(l), mode);
    return Pdb{{d, d}, 1, 1};
  };
  return run_schedule(g, streams, opt);
}

ScheduleResult schedule_any(const NetworkGraph& g, const std::vector<Stream>& streams, Mode mode) {
  switch (mode) {
    case Mode::Med: return schedule_scalar(g, streams, ScalarMode::Median);
    case Mode::Max: return schedule_scalar(g, streams, ScalarMode::Maximum);
    default: return schedule(g, streams, mode);
  }
}

}  // namespace fips
