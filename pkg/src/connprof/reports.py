"""Report rendering: aligned-column tables and machine-readable JSON.

The table mirrors the classic experiment layout, one column per evaluator
group, with rows mean(cat), mean(con), time (m:s), and backtracks. The JSON
payload carries every per-pair spread so nothing is lost to formatting;
``parse_table`` reads the table back into numbers so the two formats can be
cross-checked.
"""

from __future__ import annotations

from .stats import SpreadResult, TextReport

TABLE_ROWS = ("mean(cat)", "mean(con)", "time (m:s)", "backtracks")


def format_mmss(ms: float) -> str:
    """Milliseconds as m:ss with unbounded minutes (807000 -> '13:27')."""
    total_seconds = int(round(ms / 1000.0))
    return f"{total_seconds // 60}:{total_seconds % 60:02d}"


def parse_mmss(text: str) -> float:
    minutes, seconds = text.split(":")
    return (int(minutes) * 60 + int(seconds)) * 1000.0


def _spread_to_json(result: SpreadResult) -> dict:
    return {"mu2": result.mu2, "mean_rank": result.mean_rank, "n_evaluators": result.n_evaluators}


def report_to_json(report: TextReport, granularity: str | None = None) -> dict:
    """JSON form of one report; ``granularity`` filters the per-pair detail."""
    per_pair = []
    for stats in report.per_pair:
        entry: dict = {"pair_index": stats.pair_index}
        if granularity in (None, "category"):
            entry["category"] = _spread_to_json(stats.category)
            entry["mode_category_id"] = stats.mode_category_id
        if granularity in (None, "conjunct"):
            entry["conjunct"] = _spread_to_json(stats.conjunct)
            entry["mode_conjunct_id"] = stats.mode_conjunct_id
        per_pair.append(entry)
    return {
        "document_id": report.document_id,
        "n_evaluators": report.n_evaluators,
        "mean_cat": report.mean_cat,
        "mean_con": report.mean_con,
        "mean_time_ms": report.mean_time_ms,
        "mean_backtracks": report.mean_backtracks,
        "pair_weighting": report.pair_weighting,
        "per_pair": per_pair,
    }


def render_table(reports: list[TextReport]) -> str:
    """Aligned-column table, one column per report.

    Rows with no data anywhere (e.g. timing for synthesized corpora without
    a timing recipe) are still printed, as '-', to keep the shape stable.
    """
    headers = [f"{r.document_id} ({r.n_evaluators})" for r in reports]
    columns: list[list[str]] = []
    for report in reports:
        columns.append(
            [
                f"{report.mean_cat:.2f}",
                f"{report.mean_con:.2f}",
                format_mmss(report.mean_time_ms) if report.mean_time_ms is not None else "-",
                f"{report.mean_backtracks:.1f}" if report.mean_backtracks is not None else "-",
            ]
        )

    label_width = max(len(label) for label in TABLE_ROWS)
    widths = [max(len(headers[i]), max(len(col[r]) for r in range(len(TABLE_ROWS)))) for i, col in enumerate(columns)]
    lines = [" " * label_width + "  " + "  ".join(h.rjust(w) for h, w in zip(headers, widths))]
    for r, label in enumerate(TABLE_ROWS):
        cells = "  ".join(columns[i][r].rjust(widths[i]) for i in range(len(columns)))
        lines.append(label.ljust(label_width) + "  " + cells)
    return "\n".join(lines)


def parse_table(text: str) -> dict[str, dict[str, float | None]]:
    """Parse render_table output back into numbers, keyed by column header.

    Time cells come back as milliseconds; '-' cells come back as None. Used
    to assert that the table and the JSON payload carry the same numbers.
    """
    lines = [line for line in text.splitlines() if line.strip()]
    header_line = lines[0]
    # Column headers look like "A (14)"; split on two-or-more spaces.
    headers = [h for h in header_line.strip().split("  ") if h.strip()]
    headers = [h.strip() for h in headers]
    result: dict[str, dict[str, float | None]] = {h: {} for h in headers}
    for line in lines[1:]:
        row_label = None
        for label in TABLE_ROWS:
            if line.startswith(label):
                row_label = label
                break
        if row_label is None:
            continue
        cells = [c for c in line[len(row_label):].strip().split() if c]
        for header, cell in zip(headers, cells):
            if cell == "-":
                result[header][row_label] = None
            elif row_label == "time (m:s)":
                result[header][row_label] = parse_mmss(cell)
            else:
                result[header][row_label] = float(cell)
    return result
