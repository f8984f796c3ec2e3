#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace vgecg {

// AAMI EC57 heartbeat classes.
enum class AamiLabel { N, S, V, F, Q };

// Classes used by the classifiers; F and Q are excluded from training/evaluation.
inline constexpr std::size_t kNumClasses = 3;
inline constexpr std::array<AamiLabel, kNumClasses> kClassifiedLabels = {AamiLabel::N, AamiLabel::S,
                                                                          AamiLabel::V};

// Maps an MIT-BIH beat annotation symbol onto its AAMI class. Non-beat
// annotations ('+', '~', '|', ...) have no class.
std::optional<AamiLabel> map_symbol(char symbol);

char label_char(AamiLabel label);
std::optional<AamiLabel> parse_label(std::string_view text);

// Index into {N, S, V}; nullopt for F and Q.
std::optional<std::size_t> class_index(AamiLabel label);
AamiLabel class_label(std::size_t index);

}  // namespace vgecg
