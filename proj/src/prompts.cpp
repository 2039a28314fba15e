#include "univar/prompts.hpp"

namespace univar::prompts {

std::string fill(std::string_view tmpl, std::string_view placeholder,
                 std::string_view replacement) {
  std::string out;
  out.reserve(tmpl.size() + replacement.size());
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    std::size_t hit = tmpl.find(placeholder, pos);
    if (hit == std::string_view::npos) {
      out.append(tmpl.substr(pos));
      break;
    }
    out.append(tmpl.substr(pos, hit - pos));
    out.append(replacement);
    pos = hit + placeholder.size();
  }
  return out;
}

}  // namespace univar::prompts
