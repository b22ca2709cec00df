"""Command-line BER sweep harness.

Builds or loads a channel, optionally runs LED selection, sweeps SNR for the
requested detector(s), and writes plot-ready CSV plus a JSON manifest that
pins down the run:

  ber.csv        snr_db,detector,qam,selection,bits,errors,ber,seed
  selection.csv  rank,pairs,worst_condition,selected     (only with --select auto)
  manifest.json  resolved config, channel provenance, selection table, version

Exit codes: 0 success, 2 configuration error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .channel import default_room_geometry, load_channel_csv, normalize_channel
from .glim import LedMapping
from .selection import SelectionReport, analyze_selection
from .sim import DETECTORS, BerRecord, SimConfig, run_ber_sweep

__all__ = ["main", "build_parser"]


def _parse_snr_grid(text: str):
    try:
        start, step, stop = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"malformed SNR range {text!r}; expected start:step:stop"
        ) from None
    if step <= 0 or stop < start:
        raise argparse.ArgumentTypeError(f"SNR range {text!r} must increase")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return tuple(start + i * step for i in range(count))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="glim-sim",
        description="Monte Carlo BER sweeps for GLIM optical MIMO-OFDM.",
    )
    parser.add_argument("--nt", type=int, default=8, help="number of LEDs (even)")
    parser.add_argument("--nr", type=int, default=8, help="number of photodetectors")
    parser.add_argument("--qam", type=int, choices=(4, 8, 16), default=4, help="QAM order")
    parser.add_argument("--nfft", type=int, default=64, help="OFDM subcarriers (power of two)")
    parser.add_argument(
        "--snr", type=_parse_snr_grid, default="0:5:40", help="SNR grid in dB as start:step:stop"
    )
    parser.add_argument("--min-bits", type=int, default=100_000, help="minimum bits per point")
    parser.add_argument("--min-errors", type=int, default=100, help="minimum errors per point")
    parser.add_argument(
        "--detector", choices=DETECTORS + ("all",), default="map", help="detector(s) to sweep"
    )
    parser.add_argument(
        "--select",
        default="off",
        help="LED selection: off, auto, or pairs=1-3,2-4,... for an explicit mapping",
    )
    parser.add_argument(
        "--channel",
        default="lambertian",
        help="channel source: 'lambertian' (built-in geometry) or file:PATH (CSV)",
    )
    parser.add_argument(
        "--normalize",
        choices=("on", "off"),
        default="on",
        help="rescale the channel to unit mean column energy",
    )
    parser.add_argument("--seed", type=int, default=1, help="base RNG seed")
    parser.add_argument("--workers", type=int, default=1, help="worker processes")
    parser.add_argument("--out", default="out", help="output directory")
    return parser


def _resolve_channel_arg(args):
    """Returns (ChannelMatrix, provenance dict). Raises ValueError on bad input."""
    if args.channel == "lambertian":
        geometry = default_room_geometry(n_tx=args.nt, n_rx=args.nr)
        provenance = {
            "source": "lambertian",
            "n_tx": args.nt,
            "n_rx": args.nr,
            "led_side_m": 4.0,
            "pd_side_m": 1.0,
            "separation_m": 2.15,
            "lambertian_order": geometry.lambertian_order,
            "pd_area_m2": geometry.pd_area,
            "pd_fov_half_angle_rad": geometry.pd_fov_half_angle,
            "responsivity": geometry.responsivity,
        }
        from .channel import build_lambertian_channel

        return build_lambertian_channel(geometry), provenance
    if args.channel.startswith("file:"):
        path = Path(args.channel[len("file:") :])
        try:
            raw = path.read_bytes()
        except OSError as exc:
            raise ValueError(f"argument --channel: cannot read {path}: {exc}") from None
        cm = load_channel_csv(path)
        if cm.n_tx != args.nt or cm.n_rx != args.nr:
            raise ValueError(
                f"argument --channel: file is {cm.n_rx}x{cm.n_tx} but --nr/--nt "
                f"request {args.nr}x{args.nt}"
            )
        return cm, {
            "source": "file",
            "path": str(path),
            "sha256": hashlib.sha256(raw).hexdigest(),
        }
    raise ValueError(
        f"argument --channel: expected 'lambertian' or 'file:PATH', got {args.channel!r}"
    )


def _resolve_selection_arg(args, channel):
    """Returns (selection for SimConfig, report or None)."""
    if args.select == "off":
        return "off", None
    if args.select == "auto":
        return "auto", analyze_selection(channel)
    if args.select.startswith("pairs="):
        try:
            mapping = LedMapping.from_string(args.select[len("pairs=") :])
        except ValueError as exc:
            raise ValueError(f"argument --select: {exc}") from None
        if mapping.n_tx != channel.n_tx:
            raise ValueError(
                f"argument --select: mapping covers {mapping.n_tx} LEDs, channel has {channel.n_tx}"
            )
        return mapping, None
    raise ValueError(
        f"argument --select: expected off, auto or pairs=..., got {args.select!r}"
    )


def _write_ber_csv(path: Path, records) -> None:
    lines = ["snr_db,detector,qam,selection,bits,errors,ber,seed"]
    for r in sorted(records, key=lambda r: (r.detector, r.snr_db)):
        lines.append(
            f"{r.snr_db:g},{r.detector},{r.qam_order},{r.selection},"
            f"{r.bits_sent},{r.bit_errors},{r.ber:.6e},{r.seed}"
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _selection_rows(report: SelectionReport):
    # Quantize scores so candidates tied up to float dust rank in canonical
    # order, consistent with the selection tie-break.
    order = sorted(
        range(len(report.candidates)),
        key=lambda i: (float(f"{report.candidates[i].worst_condition:.10g}"), i),
    )
    rows = []
    for rank, i in enumerate(order, start=1):
        score = report.candidates[i]
        rows.append(
            {
                "rank": rank,
                "pairs": score.mapping.to_string("|"),
                "worst_condition": score.worst_condition,
                "selected": int(score.mapping == report.selected),
            }
        )
    return rows


def _write_selection_csv(path: Path, report: SelectionReport) -> None:
    lines = ["rank,pairs,worst_condition,selected"]
    for row in _selection_rows(report):
        lines.append(
            f"{row['rank']},{row['pairs']},{row['worst_condition']:.9g},{row['selected']}"
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_manifest(path: Path, args, provenance, report, records) -> None:
    manifest = {
        "tool": {"name": "glim-sim", "version": __version__},
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "config": {
            "nt": args.nt,
            "nr": args.nr,
            "qam": args.qam,
            "nfft": args.nfft,
            "snr_grid_db": list(args.snr),
            "min_bits": args.min_bits,
            "min_errors": args.min_errors,
            "detector": args.detector,
            "select": args.select,
            "channel": args.channel,
            "normalize": args.normalize,
            "seed": args.seed,
            "workers": args.workers,
        },
        "channel": dict(provenance, normalized=args.normalize == "on"),
        "selection": {
            "mode": args.select,
            "mapping": records[0].selection if records else None,
        },
        "records": len(records),
    }
    if report is not None:
        manifest["selection"]["mapping"] = report.selected.to_string("|")
        manifest["selection"]["max_cosine"] = report.max_cosine
        manifest["selection"]["removed_pairs"] = [list(p) for p in report.removed_pairs]
        manifest["selection"]["used_fallback"] = report.used_fallback
        manifest["selection"]["candidates"] = _selection_rows(report)
    path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    # Configuration phase: any failure here is a usage error (exit 2).
    try:
        channel, provenance = _resolve_channel_arg(args)
        if args.normalize == "on":
            channel = normalize_channel(channel)
        selection, report = _resolve_selection_arg(args, channel)
        detectors = list(DETECTORS) if args.detector == "all" else [args.detector]
        configs = [
            SimConfig(
                channel=channel,
                snr_grid_db=args.snr,
                detector=d,
                qam_order=args.qam,
                n_subcarriers=args.nfft,
                selection=selection,
                normalize=False,  # already applied above
                min_bits=args.min_bits,
                min_errors=args.min_errors,
                seed=args.seed,
                workers=args.workers,
            )
            for d in detectors
        ]
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
    except (ValueError, OSError) as exc:
        print(f"glim-sim: error: {exc}", file=sys.stderr)
        return 2

    # Simulation phase: failures here are runtime errors (exit 3).
    try:
        records = []
        for cfg in configs:
            def note(r: BerRecord) -> None:
                print(
                    f"[{r.detector}] snr={r.snr_db:g} dB bits={r.bits_sent} "
                    f"errors={r.bit_errors} ber={r.ber:.3e}",
                    file=sys.stderr,
                )

            records.extend(run_ber_sweep(cfg, progress=note))
        _write_ber_csv(out_dir / "ber.csv", records)
        if report is not None:
            _write_selection_csv(out_dir / "selection.csv", report)
        _write_manifest(out_dir / "manifest.json", args, provenance, report, records)
    except Exception as exc:  # noqa: BLE001 - boundary: report and signal failure
        print(f"glim-sim: runtime error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
