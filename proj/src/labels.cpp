#include "vgecg/labels.hpp"

#include <stdexcept>
#include <string>

namespace vgecg {

std::optional<AamiLabel> map_symbol(char symbol) {
  switch (symbol) {
    case 'N':
    case 'L':
    case 'R':
    case 'e':
    case 'j':
      return AamiLabel::N;
    case 'A':
    case 'a':
    case 'J':
    case 'S':
      return AamiLabel::S;
    case 'V':
    case 'E':
      return AamiLabel::V;
    case 'F':
      return AamiLabel::F;
    case '/':
    case 'f':
    case 'Q':
      return AamiLabel::Q;
    default:
      return std::nullopt;
  }
}

char label_char(AamiLabel label) {
  switch (label) {
    case AamiLabel::N: return 'N';
    case AamiLabel::S: return 'S';
    case AamiLabel::V: return 'V';
    case AamiLabel::F: return 'F';
    case AamiLabel::Q: return 'Q';
  }
  return '?';
}

std::optional<AamiLabel> parse_label(std::string_view text) {
  if (text.size() != 1) return std::nullopt;
  switch (text[0]) {
    case 'N': return AamiLabel::N;
    case 'S': return AamiLabel::S;
    case 'V': return AamiLabel::V;
    case 'F': return AamiLabel::F;
    case 'Q': return AamiLabel::Q;
    default: return std::nullopt;
  }
}

std::optional<std::size_t> class_index(AamiLabel label) {
  switch (label) {
    case AamiLabel::N: return 0;
    case AamiLabel::S: return 1;
    case AamiLabel::V: return 2;
    default: return std::nullopt;
  }
}

AamiLabel class_label(std::size_t index) {
  if (index >= kNumClasses) throw std::out_of_range("class index " + std::to_string(index));
  return kClassifiedLabels[index];
}

}  // namespace vgecg
