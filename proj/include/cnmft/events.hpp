#pragma once

#include <algorithm>
#include <vector>

namespace cnmft {

/// A transcribed note. Only pitch and onset carry information from the
/// detector; duration and velocity are synthesized for MIDI output and are
/// ignored by the evaluation.
struct NoteEvent {
    int pitch = 0;         // MIDI note number
    double onset = 0.0;    // seconds
    double duration = 0.1; // seconds, > 0
    int velocity = 80;

    bool operator==(const NoteEvent&) const = default;
};

/// Canonical order: by onset, then pitch. Makes pipeline output independent
/// of processing order.
inline void sort_events(std::vector<NoteEvent>& events) {
    std::stable_sort(events.begin(), events.end(), [](const NoteEvent& a, const NoteEvent& b) {
        if (a.onset != b.onset) return a.onset < b.onset;
        return a.pitch < b.pitch;
    });
}

/// Keeps only events with onset strictly before `seconds`.
inline std::vector<NoteEvent> truncate_events(const std::vector<NoteEvent>& events,
                                              double seconds) {
    std::vector<NoteEvent> out;
    out.reserve(events.size());
    for (const auto& e : events)
        if (e.onset < seconds) out.push_back(e);
    return out;
}

} // namespace cnmft
