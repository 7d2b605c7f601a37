"""Report container and file emission (summary.json + CSVs + event log)."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from voxmeet.errors import IoError


@dataclass
class MetricsReport:
    """Scenario metrics as a plain JSON-able dict.

    Keys: clock_mode, seed, session_id, duration_s, config, service,
    clock_offsets_us, throughput (per "s->r" stream: per-second window
    bits, mean/stdv/cov), delays (per stream: raw and corrected
    mean/stdv/p95 in ms), delay_overall, skew (per receiver), relay,
    clients, reconciliation, delay_rows, orchestrator_events.
    """

    data: dict

    def to_json(self) -> str:
        return json.dumps(self.data, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "MetricsReport":
        return cls(json.loads(text))

    def __getitem__(self, key: str):
        return self.data[key]


def write_report(report: MetricsReport, out_dir) -> list[str]:
    """Write summary.json, throughput.csv, delays.csv, events.jsonl.

    Byte-stable: rewriting the same report is a no-op diff. Returns the
    file names written.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)

        (out / "summary.json").write_text(report.to_json())

        lines = ["window_start_s,sender,receiver,bits,bps"]
        for key in sorted(report["throughput"]):
            sender, receiver = key.split("->")
            entry = report["throughput"][key]
            for w, bits in enumerate(entry["windows_bits"]):
                start = w * entry["window_s"]
                lines.append(
                    f"{start:.1f},{sender},{receiver},{bits},{bits / entry['window_s']:.1f}"
                )
        (out / "throughput.csv").write_text("\n".join(lines) + "\n")

        lines = ["sender,receiver,seq,delay_ms_raw,delay_ms_corrected"]
        for sender, receiver, seq, raw_ms, corr_ms in sorted(report["delay_rows"]):
            lines.append(f"{sender},{receiver},{seq},{raw_ms:.3f},{corr_ms:.3f}")
        (out / "delays.csv").write_text("\n".join(lines) + "\n")

        events = [json.dumps(e, sort_keys=True) for e in report["orchestrator_events"]]
        (out / "events.jsonl").write_text("\n".join(events) + ("\n" if events else ""))
    except OSError as e:
        raise IoError(f"cannot write report to {out}: {e}") from e
    return ["summary.json", "throughput.csv", "delays.csv", "events.jsonl"]


def read_report(in_dir) -> MetricsReport:
    path = Path(in_dir) / "summary.json"
    try:
        return MetricsReport.from_json(path.read_text())
    except OSError as e:
        raise IoError(f"cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise IoError(f"{path} is not valid JSON: {e}") from e
