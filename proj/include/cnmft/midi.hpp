#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "cnmft/audio.hpp" // detail::read_file_bytes
#include "cnmft/events.hpp"

namespace cnmft {

inline constexpr int kMidiPpq = 480;
inline constexpr int kMidiTempoUsPerQuarter = 500000; // 120 BPM
inline constexpr double kMidiTicksPerSecond = 960.0;  // ppq * 1e6 / tempo

namespace detail {

inline void midi_vlq(std::vector<unsigned char>& out, uint32_t v) {
    unsigned char buf[4];
    int k = 0;
    buf[k++] = static_cast<unsigned char>(v & 0x7F);
    while (v >>= 7) buf[k++] = static_cast<unsigned char>((v & 0x7F) | 0x80);
    while (k--) out.push_back(buf[k]);
}

inline void midi_u32be(std::vector<unsigned char>& out, uint32_t v) {
    out.push_back(static_cast<unsigned char>((v >> 24) & 0xFF));
    out.push_back(static_cast<unsigned char>((v >> 16) & 0xFF));
    out.push_back(static_cast<unsigned char>((v >> 8) & 0xFF));
    out.push_back(static_cast<unsigned char>(v & 0xFF));
}

inline uint32_t midi_read_u32be(const unsigned char* p) {
    return (static_cast<uint32_t>(p[0]) << 24) | (static_cast<uint32_t>(p[1]) << 16) |
           (static_cast<uint32_t>(p[2]) << 8) | static_cast<uint32_t>(p[3]);
}

} // namespace detail

/// Writes a standard MIDI file: format 0, PPQ 480, fixed 120 BPM tempo, one
/// track. Note-offs at equal ticks are emitted before note-ons so truncated
/// durations never swallow the following note.
inline void write_midi(const std::vector<NoteEvent>& events, const std::filesystem::path& path) {
    struct RawEvent {
        int64_t tick;
        bool on;
        int pitch;
        int velocity;
    };
    std::vector<RawEvent> raw;
    raw.reserve(events.size() * 2);
    for (const auto& e : events) {
        if (e.pitch < 0 || e.pitch > 127) fail(Errc::bad_argument, "MIDI pitch out of range");
        const auto on = static_cast<int64_t>(std::llround(e.onset * kMidiTicksPerSecond));
        auto off = static_cast<int64_t>(std::llround((e.onset + e.duration) * kMidiTicksPerSecond));
        if (off <= on) off = on + 1;
        raw.push_back({on, true, e.pitch, std::clamp(e.velocity, 1, 127)});
        raw.push_back({off, false, e.pitch, 0});
    }
    std::sort(raw.begin(), raw.end(), [](const RawEvent& a, const RawEvent& b) {
        if (a.tick != b.tick) return a.tick < b.tick;
        if (a.on != b.on) return !a.on; // offs first
        return a.pitch < b.pitch;
    });

    std::vector<unsigned char> track;
    // tempo meta event at tick 0
    track.insert(track.end(), {0x00, 0xFF, 0x51, 0x03});
    track.push_back((kMidiTempoUsPerQuarter >> 16) & 0xFF);
    track.push_back((kMidiTempoUsPerQuarter >> 8) & 0xFF);
    track.push_back(kMidiTempoUsPerQuarter & 0xFF);

    int64_t cursor = 0;
    for (const auto& ev : raw) {
        detail::midi_vlq(track, static_cast<uint32_t>(ev.tick - cursor));
        cursor = ev.tick;
        track.push_back(ev.on ? 0x90 : 0x80);
        track.push_back(static_cast<unsigned char>(ev.pitch));
        track.push_back(static_cast<unsigned char>(ev.velocity));
    }
    track.insert(track.end(), {0x00, 0xFF, 0x2F, 0x00}); // end of track

    std::vector<unsigned char> bytes;
    bytes.insert(bytes.end(), {'M', 'T', 'h', 'd'});
    detail::midi_u32be(bytes, 6);
    bytes.insert(bytes.end(), {0x00, 0x00, 0x00, 0x01}); // format 0, one track
    bytes.push_back((kMidiPpq >> 8) & 0xFF);
    bytes.push_back(kMidiPpq & 0xFF);
    bytes.insert(bytes.end(), {'M', 'T', 'r', 'k'});
    detail::midi_u32be(bytes, static_cast<uint32_t>(track.size()));
    bytes.insert(bytes.end(), track.begin(), track.end());

    std::ofstream out(path, std::ios::binary);
    if (!out) fail(Errc::io_failure, "cannot write file: " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(Errc::io_failure, "write failed: " + path.string());
}

/// Reads note events from a standard MIDI file (formats 0 and 1). Handles
/// running status, note-on with velocity 0 as note-off, and tick-to-seconds
/// conversion through the tempo map. Notes left open get a 0.5 s duration.
inline std::vector<NoteEvent> read_midi(const std::filesystem::path& path) {
    const auto bytes = detail::read_file_bytes(path);
    if (bytes.size() < 14 || std::memcmp(bytes.data(), "MThd", 4) != 0)
        fail(Errc::bad_format, "not a MIDI file: " + path.string());
    const uint32_t header_len = detail::midi_read_u32be(bytes.data() + 4);
    const uint16_t division = static_cast<uint16_t>((bytes[12] << 8) | bytes[13]);
    if (division & 0x8000)
        fail(Errc::unsupported_encoding, "SMPTE time division is not supported");
    const double ppq = division;
    if (ppq <= 0) fail(Errc::bad_format, "zero time division");

    struct TickEvent {
        uint64_t tick;
        int type; // 0 tempo, 1 note-on, 2 note-off
        int pitch = 0;
        int velocity = 0;
        uint32_t tempo = 0;
    };
    std::vector<TickEvent> all;

    std::size_t pos = 8 + header_len;
    while (pos + 8 <= bytes.size()) {
        if (std::memcmp(bytes.data() + pos, "MTrk", 4) != 0) {
            pos += 8 + detail::midi_read_u32be(bytes.data() + pos + 4);
            continue;
        }
        const uint32_t track_len = detail::midi_read_u32be(bytes.data() + pos + 4);
        std::size_t p = pos + 8;
        const std::size_t end = std::min(bytes.size(), p + track_len);
        uint64_t tick = 0;
        unsigned char running = 0;
        while (p < end) {
            uint32_t delta = 0;
            while (p < end) {
                const unsigned char b = bytes[p++];
                delta = (delta << 7) | (b & 0x7F);
                if (!(b & 0x80)) break;
            }
            tick += delta;
            if (p >= end) break;
            unsigned char status = bytes[p];
            if (status & 0x80) {
                ++p;
                if (status < 0xF0) running = status;
            } else {
                status = running;
                if (!(status & 0x80)) fail(Errc::bad_format, "dangling running status");
            }
            if (status == 0xFF) {
                if (p >= end) break;
                const unsigned char meta = bytes[p++];
                uint32_t len = 0;
                while (p < end) {
                    const unsigned char b = bytes[p++];
                    len = (len << 7) | (b & 0x7F);
                    if (!(b & 0x80)) break;
                }
                if (meta == 0x51 && len == 3 && p + 3 <= end) {
                    const uint32_t tempo = (static_cast<uint32_t>(bytes[p]) << 16) |
                                           (static_cast<uint32_t>(bytes[p + 1]) << 8) |
                                           bytes[p + 2];
                    all.push_back({tick, 0, 0, 0, tempo});
                }
                p += len;
            } else if (status == 0xF0 || status == 0xF7) {
                uint32_t len = 0;
                while (p < end) {
                    const unsigned char b = bytes[p++];
                    len = (len << 7) | (b & 0x7F);
                    if (!(b & 0x80)) break;
                }
                p += len;
            } else {
                const int kind = status >> 4;
                const int nargs = (kind == 0xC || kind == 0xD) ? 1 : 2;
                if (p + static_cast<std::size_t>(nargs) > end) break;
                const int d0 = bytes[p];
                const int d1 = nargs == 2 ? bytes[p + 1] : 0;
                p += static_cast<std::size_t>(nargs);
                if (kind == 0x9 && d1 > 0)
                    all.push_back({tick, 1, d0, d1, 0});
                else if (kind == 0x8 || (kind == 0x9 && d1 == 0))
                    all.push_back({tick, 2, d0, 0, 0});
            }
        }
        pos += 8 + track_len;
    }

    std::stable_sort(all.begin(), all.end(),
                     [](const TickEvent& a, const TickEvent& b) { return a.tick < b.tick; });

    // Walk the tempo map to place every event in seconds.
    std::vector<NoteEvent> events;
    std::vector<std::pair<int, std::size_t>> open; // pitch -> index into events
    double seconds = 0.0;
    uint64_t last_tick = 0;
    double us_per_tick = kMidiTempoUsPerQuarter / ppq;
    for (const auto& ev : all) {
        seconds += static_cast<double>(ev.tick - last_tick) * us_per_tick * 1e-6;
        last_tick = ev.tick;
        if (ev.type == 0) {
            us_per_tick = ev.tempo / ppq;
        } else if (ev.type == 1) {
            NoteEvent e;
            e.pitch = ev.pitch;
            e.onset = seconds;
            e.duration = 0.5;
            e.velocity = ev.velocity;
            open.emplace_back(ev.pitch, events.size());
            events.push_back(e);
        } else {
            for (auto it = open.begin(); it != open.end(); ++it) {
                if (it->first == ev.pitch) {
                    auto& e = events[it->second];
                    e.duration = std::max(seconds - e.onset, 1e-4);
                    open.erase(it);
                    break;
                }
            }
        }
    }
    sort_events(events);
    return events;
}

} // namespace cnmft
