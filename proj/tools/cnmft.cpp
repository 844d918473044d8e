// cnmft - semi-supervised piano transcription via convolutive NMF.
// Subcommands: train, transcribe, eval, synthbench.
// Exit codes: 0 ok, 1 usage error, 2 data error, 3 verification failure.

#include <cstdio>
#include <exception>

#include <CLI11.hpp>

#include "cnmft/cli.hpp"
#include "cnmft/version.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Semi-supervised note transcription with convolutive NMF templates"};
    app.set_version_flag("--version", cnmft::kVersion);
    app.require_subcommand(1);

    cnmft::cli::TrainOptions train;
    auto* train_cmd = app.add_subcommand("train", "Learn one template per note from a directory "
                                                  "of isolated-note WAV files");
    train_cmd->add_option("--notes", train.notes_dir, "Directory of <midi>_*.wav note recordings")
        ->required();
    train_cmd->add_option("--tau", train.tau, "Template length in frames")->capture_default_str();
    train_cmd->add_option("--iters", train.iters, "Training iterations per note")
        ->capture_default_str();
    train_cmd->add_option("--out", train.out_path, "Output library file")->required();
    train_cmd->add_option("--jobs", train.jobs, "Parallel jobs (default: CNMF_JOBS or all cores)");
    train_cmd->add_flag("--maps", train.maps_names, "Parse MAPS isolated-note file names");
    train_cmd->add_option("--intensity", train.intensity,
                          "Loudness tag to keep with --maps (F, M, or P)")
        ->capture_default_str();
    train_cmd->add_option("--manifest", train.manifest_path, "Run manifest path");

    cnmft::cli::TranscribeOptions transcribe;
    auto* transcribe_cmd =
        app.add_subcommand("transcribe", "Transcribe a recording with a trained library");
    transcribe_cmd->add_option("--in", transcribe.in_wav, "Input WAV file")->required();
    transcribe_cmd->add_option("--lib", transcribe.lib_path, "Template library file")->required();
    transcribe_cmd->add_option("--delta", transcribe.delta, "Peak-picking threshold offset")
        ->required();
    transcribe_cmd->add_option("--iters", transcribe.iters, "Activation solver iterations")
        ->capture_default_str();
    transcribe_cmd->add_option("--out", transcribe.out_midi, "Output MIDI file")->required();
    transcribe_cmd->add_option("--csv", transcribe.csv_path, "Optional activation CSV export");
    transcribe_cmd->add_option("--spec-csv", transcribe.spec_csv_path,
                               "Optional spectrogram CSV export");
    transcribe_cmd->add_option("--manifest", transcribe.manifest_path, "Run manifest path");

    cnmft::cli::EvalOptions eval;
    auto* eval_cmd = app.add_subcommand("eval", "Score transcriptions against reference MIDI");
    eval_cmd->add_option("--est", eval.est_dir, "Directory of estimated .mid files "
                                                "(.csv activations with --sweep)")
        ->required();
    eval_cmd->add_option("--ref", eval.ref_dir, "Directory of reference .mid files")->required();
    eval_cmd->add_option("--tol", eval.tol, "Onset tolerance in seconds")->capture_default_str();
    eval_cmd->add_option("--first-seconds", eval.first_seconds,
                         "Truncate both sides to the first S seconds");
    eval_cmd->add_option("--sweep", eval.sweep,
                         "Pick thresholds on the default grid: 'global' or 'song'");
    eval_cmd->add_option("--report", eval.report_path, "Report CSV path")->capture_default_str();
    eval_cmd->add_option("--jobs", eval.jobs, "Parallel jobs (default: CNMF_JOBS or all cores)");
    eval_cmd->add_option("--manifest", eval.manifest_path, "Run manifest path");

    cnmft::cli::SynthbenchOptions bench;
    auto* bench_cmd =
        app.add_subcommand("synthbench", "Run the built-in synthetic verification suite");
    bench_cmd->add_option("--seed", bench.seed, "Random seed")->capture_default_str();
    bench_cmd->add_option("--scale", bench.scale, "Workload scale factor")->capture_default_str();
    bench_cmd->add_option("--manifest", bench.manifest_path, "Run manifest path")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*train_cmd) cnmft::cli::run_train(train);
        if (*transcribe_cmd) cnmft::cli::run_transcribe(transcribe);
        if (*eval_cmd) cnmft::cli::run_eval(eval);
        if (*bench_cmd) return cnmft::cli::run_synthbench(bench);
    } catch (const cnmft::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
