#pragma once

#include <cstddef>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "hybridsim/clifford.hpp"

namespace hybridsim {

struct GateEvent {
  std::size_t i = 0;
  std::size_t j = 0;
  CliffordGate gate;
};

struct MeasureEvent {
  std::size_t site = 0;
  bool outcome = false;
};

struct ResetEvent {
  std::size_t site = 0;
};

using Event = std::variant<GateEvent, MeasureEvent, ResetEvent>;

/// Ordered channel history of one trajectory. Text form, one record per line:
///   GATE <i> <j> <img X0> <img Z0> <img X1> <img Z1>     e.g. GATE 0 1 +XX +ZI +IX +ZZ
///   MEASURE <site> <outcome 0|1>
///   RESET <site>
/// Blank lines and lines starting with '#' are ignored.
class EventLog {
 public:
  void gate(std::size_t i, std::size_t j, const CliffordGate& g) { events_.push_back(GateEvent{i, j, g}); }
  void measure(std::size_t site, bool outcome) { events_.push_back(MeasureEvent{site, outcome}); }
  void reset(std::size_t site) { events_.push_back(ResetEvent{site}); }

  const std::vector<Event>& events() const { return events_; }
  std::size_t size() const { return events_.size(); }
  void clear() { events_.clear(); }

  void write(std::ostream& os) const {
    for (const auto& ev : events_) {
      if (const auto* g = std::get_if<GateEvent>(&ev)) {
        os << "GATE " << g->i << ' ' << g->j;
        for (int a = 0; a < 4; ++a) os << ' ' << g->gate.image_string(a);
      } else if (const auto* m = std::get_if<MeasureEvent>(&ev)) {
        os << "MEASURE " << m->site << ' ' << (m->outcome ? 1 : 0);
      } else {
        os << "RESET " << std::get<ResetEvent>(ev).site;
      }
      os << '\n';
    }
  }

  std::string str() const {
    std::ostringstream os;
    write(os);
    return os.str();
  }

  static EventLog read(std::istream& is) {
    EventLog log;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      std::istringstream ls(line);
      std::string tag;
      if (!(ls >> tag) || tag.front() == '#') continue;
      auto fail = [&](const std::string& why) {
        throw std::runtime_error("event log line " + std::to_string(lineno) + ": " + why);
      };
      if (tag == "GATE") {
        std::size_t i = 0, j = 0;
        std::array<std::string, 4> imgs;
        if (!(ls >> i >> j >> imgs[0] >> imgs[1] >> imgs[2] >> imgs[3])) fail("malformed GATE record");
        try {
          log.gate(i, j, CliffordGate::from_strings(imgs));
        } catch (const std::exception& e) {
          fail(e.what());
        }
      } else if (tag == "MEASURE") {
        std::size_t site = 0;
        int outcome = 0;
        if (!(ls >> site >> outcome) || (outcome != 0 && outcome != 1)) fail("malformed MEASURE record");
        log.measure(site, outcome == 1);
      } else if (tag == "RESET") {
        std::size_t site = 0;
        if (!(ls >> site)) fail("malformed RESET record");
        log.reset(site);
      } else {
        fail("unknown record '" + tag + "'");
      }
      std::string extra;
      if (ls >> extra) fail("trailing text '" + extra + "'");
    }
    return log;
  }

  static EventLog parse(const std::string& text) {
    std::istringstream is(text);
    return read(is);
  }

 private:
  std::vector<Event> events_;
};

}  // namespace hybridsim
