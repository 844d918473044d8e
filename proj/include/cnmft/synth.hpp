#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "cnmft/audio.hpp"
#include "cnmft/events.hpp"

namespace cnmft {

inline double midi_to_hz(int midi) { return 440.0 * std::pow(2.0, (midi - 69) / 12.0); }

/// Renders a note as a sum of exponentially damped harmonic partials with
/// 1/k amplitude rolloff. Higher partials decay faster, so the spectrum
/// genuinely evolves over the life of the note.
inline std::vector<double> synth_damped_note(double f0, double seconds, int sample_rate,
                                             int partials = 8, double decay_seconds = 0.4,
                                             double amplitude = 0.5) {
    const auto len = static_cast<std::size_t>(std::llround(seconds * sample_rate));
    std::vector<double> out(len, 0.0);
    const double nyquist = sample_rate / 2.0;
    for (int k = 1; k <= partials; ++k) {
        const double fk = f0 * k;
        if (fk >= nyquist) break;
        const double ak = amplitude / k;
        const double rate = 1.0 / (decay_seconds / (1.0 + 0.5 * (k - 1)));
        const double w = 2.0 * std::numbers::pi * fk / sample_rate;
        for (std::size_t t = 0; t < len; ++t) {
            const double ts = static_cast<double>(t) / sample_rate;
            out[t] += ak * std::exp(-rate * ts) * std::sin(w * static_cast<double>(t));
        }
    }
    return out;
}

struct SequenceEvent {
    int midi = 60;
    double onset = 0.0; // seconds
};

/// Mixes damped notes at the given onsets into one clip.
inline AudioClip synth_sequence(const std::vector<SequenceEvent>& events, double total_seconds,
                                int sample_rate, double note_seconds = 1.0,
                                double amplitude = 0.25) {
    AudioClip clip;
    clip.sample_rate = sample_rate;
    clip.samples.assign(static_cast<std::size_t>(std::llround(total_seconds * sample_rate)), 0.0);
    for (const auto& ev : events) {
        const auto note = synth_damped_note(midi_to_hz(ev.midi), note_seconds, sample_rate, 8, 0.4,
                                            amplitude);
        const auto start = static_cast<std::size_t>(std::llround(ev.onset * sample_rate));
        for (std::size_t t = 0; t < note.size() && start + t < clip.samples.size(); ++t)
            clip.samples[start + t] += note[t];
    }
    return clip;
}

} // namespace cnmft
