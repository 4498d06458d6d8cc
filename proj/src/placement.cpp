#include <array>
#include <sstream>

#include "dropnet/error.hpp"
#include "dropnet/model.hpp"

namespace dropnet {

namespace {

constexpr std::array<DropSite, kDropSiteCount> kAllSites = {
    DropSite::embedding, DropSite::recurrent, DropSite::intra_attention,
    DropSite::inter_attention, DropSite::mlp};

}  // namespace

const char* site_name(DropSite site) {
  switch (site) {
    case DropSite::embedding: return "embedding";
    case DropSite::recurrent: return "recurrent";
    case DropSite::intra_attention: return "intra_attention";
    case DropSite::inter_attention: return "inter_attention";
    case DropSite::mlp: return "mlp";
  }
  return "?";
}

PlacementSet& PlacementSet::add(DropSite site) {
  bits_ = static_cast<std::uint8_t>(bits_ | (1u << static_cast<unsigned>(site)));
  return *this;
}

bool PlacementSet::contains(DropSite site) const {
  return (bits_ & (1u << static_cast<unsigned>(site))) != 0;
}

std::string PlacementSet::to_string() const {
  if (empty()) return "none";
  std::ostringstream out;
  bool first = true;
  for (DropSite site : kAllSites) {
    if (!contains(site)) continue;
    if (!first) out << ',';
    out << site_name(site);
    first = false;
  }
  return out.str();
}

PlacementSet PlacementSet::parse(const std::string& text) {
  auto trim = [](std::string s) {
    const char* ws = " \t";
    const auto begin = s.find_first_not_of(ws);
    if (begin == std::string::npos) return std::string();
    return s.substr(begin, s.find_last_not_of(ws) - begin + 1);
  };
  const std::string whole = trim(text);
  PlacementSet result;
  if (whole.empty() || whole == "none") return result;
  if (whole.rfind("model_", 0) == 0) {
    try {
      return placement_for_model(std::stoi(whole.substr(6)));
    } catch (const std::invalid_argument&) {
      throw ConfigError("bad placement preset '" + whole + "'");
    }
  }
  std::istringstream stream(whole);
  std::string item;
  while (std::getline(stream, item, ',')) {
    const std::string name = trim(item);
    bool known = false;
    for (DropSite site : kAllSites) {
      if (name == site_name(site)) {
        result.add(site);
        known = true;
        break;
      }
    }
    if (!known) {
      throw ConfigError("unknown dropout site '" + name +
                        "' (expected embedding, recurrent, intra_attention, "
                        "inter_attention or mlp)");
    }
  }
  return result;
}

PlacementSet placement_for_model(int model_id) {
  PlacementSet set;
  switch (model_id) {
    case 1:
      break;
    case 2:
      set.add(DropSite::embedding);
      break;
    case 3:
      set.add(DropSite::recurrent);
      break;
    case 4:
      set.add(DropSite::embedding).add(DropSite::recurrent);
      break;
    case 5:
      set.add(DropSite::recurrent).add(DropSite::intra_attention);
      break;
    case 6:
      set.add(DropSite::inter_attention).add(DropSite::mlp);
      break;
    case 7:
      set.add(DropSite::recurrent).add(DropSite::inter_attention).add(DropSite::mlp);
      break;
    case 8:
      set.add(DropSite::embedding).add(DropSite::inter_attention).add(DropSite::mlp);
      break;
    case 9:
      set.add(DropSite::embedding)
          .add(DropSite::recurrent)
          .add(DropSite::inter_attention)
          .add(DropSite::mlp);
      break;
    case 10:
      set.add(DropSite::recurrent)
          .add(DropSite::intra_attention)
          .add(DropSite::inter_attention)
          .add(DropSite::mlp);
      break;
    case 11:
      set.add(DropSite::embedding)
          .add(DropSite::intra_attention)
          .add(DropSite::inter_attention)
          .add(DropSite::mlp);
      break;
    case 12:
      set.add(DropSite::embedding)
          .add(DropSite::recurrent)
          .add(DropSite::intra_attention)
          .add(DropSite::inter_attention)
          .add(DropSite::mlp);
      break;
    case 13:
      // Same sites as 9; the preset exists as the reduced-width variant.
      set.add(DropSite::embedding)
          .add(DropSite::recurrent)
          .add(DropSite::inter_attention)
          .add(DropSite::mlp);
      break;
    default:
      throw IndexError("model id " + std::to_string(model_id) +
                       " out of range [1, 13]");
  }
  return set;
}

}  // namespace dropnet
