"""Command-line interface.

Subcommands: render, extract, compare, sweep, roundtrip, serve.
Exit codes: 0 success, 1 usage error, 2 data error.
"""
from __future__ import annotations

import argparse
import json
import sys

from . import fileio, pipeline
from .metrics import multi_scale_spectral_loss


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; the contract here is exit 1
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _build_parser() -> _Parser:
    parser = _Parser(prog="notesynth",
                     description="Deterministic expressive note synthesizer")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("render", help="score JSON -> WAV (+ params dump)")
    p.add_argument("score", help="score JSON file")
    p.add_argument("-o", "--output", required=True, help="output WAV path")
    p.add_argument("--params-out", help="also dump synthesis parameters")
    p.add_argument("--text-params", action="store_true",
                   help="dump parameters as JSON instead of binary")
    p.add_argument("--seed", type=int, default=0, help="noise seed")
    p.add_argument("--reverb", default="none",
                   help="impulse response file, or 'none'")

    p = sub.add_parser("extract", help="params dump -> expression JSON")
    p.add_argument("params", help="synthesis parameter dump")
    p.add_argument("--score", required=True,
                   help="score JSON providing note boundaries")
    p.add_argument("-o", "--output", help="output JSON path (default stdout)")

    p = sub.add_parser("compare", help="two WAVs -> spectral loss JSON")
    p.add_argument("audio_a")
    p.add_argument("audio_b")

    p = sub.add_parser("sweep", help="score JSON -> control sweep CSV")
    p.add_argument("score")
    p.add_argument("-o", "--output", help="output CSV path (default stdout)")

    p = sub.add_parser("roundtrip",
                       help="score JSON -> expression recovery report")
    p.add_argument("score")

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--workers", type=int, default=None,
                   help="render worker threads (default: logical CPUs)")
    return parser


def _load_request(score_path: str, seed: int = 0,
                  reverb: str = "none") -> pipeline.RenderRequest:
    with open(score_path, "rb") as fh:
        doc = json.loads(fh.read().decode())
    return pipeline.request_from_dict(
        {"score": doc, "noise_seed": seed, "reverb": reverb})


def _write_or_print(text: str, path: str | None) -> None:
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        print(text, end="" if text.endswith("\n") else "\n")


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        if args.command == "render":
            request = _load_request(args.score, args.seed, args.reverb)
            result = pipeline.run_render(request)
            with open(args.output, "wb") as fh:
                fh.write(result.wav_bytes)
            if args.params_out:
                with open(args.params_out, "wb") as fh:
                    fh.write(fileio.write_params(result.params,
                                                 text=args.text_params))
            for clamp in result.report.clamps:
                print(f"clamped: note {clamp.note_index} {clamp.control} "
                      f"{clamp.requested:.3f} -> {clamp.effective:.3f} "
                      f"({clamp.reason})", file=sys.stderr)
            return 0

        if args.command == "extract":
            with open(args.params, "rb") as fh:
                params = fileio.read_params(fh.read())
            with open(args.score, "rb") as fh:
                seq, _ = fileio.parse_score(fh.read())
            expressions = pipeline.run_extract(params, seq)
            _write_or_print(json.dumps(
                [e.as_dict() for e in expressions], indent=2), args.output)
            return 0

        if args.command == "compare":
            buffers = []
            for path in (args.audio_a, args.audio_b):
                with open(path, "rb") as fh:
                    buffers.append(fileio.read_wav(fh.read()))
            total, per_size = multi_scale_spectral_loss(*buffers)
            print(json.dumps({
                "spectral_loss": total,
                "per_size": {str(k): v for k, v in per_size.items()},
            }, indent=2))
            return 0

        if args.command == "sweep":
            request = _load_request(args.score)
            results = pipeline.run_sweep(request)
            _write_or_print(pipeline.sweep_results_to_csv(results),
                            args.output)
            for res in results:
                if res.error:
                    print(f"{res.control}: {res.error}", file=sys.stderr)
            return 0

        if args.command == "roundtrip":
            request = _load_request(args.score)
            print(json.dumps(pipeline.run_roundtrip(request), indent=2))
            return 0

        if args.command == "serve":
            import uvicorn

            from .server import create_app

            uvicorn.run(create_app(worker_count=args.workers),
                        host=args.host, port=args.port, log_level="info")
            return 0
    except (ValueError, OSError) as exc:
        print(f"notesynth {args.command}: {exc}", file=sys.stderr)
        return 2
    return 1  # unreachable with required=True subparsers


if __name__ == "__main__":
    sys.exit(main())
