"""Fixed-width terminal tables for plan and case-grid summaries."""

import shutil
import textwrap

_NUMBER_FORMAT = "{:.4g}"
_MIN_WIDTH = 6


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return _NUMBER_FORMAT.format(value)
    return str(value)


def format_row(cells, widths, last_width):
    # type: (list, list, int) -> list
    """Format a single row into display lines with text wrapping.

    Returns a list of strings. The first line contains all columns;
    continuation lines of the last column are indented to it.
    """
    last = textwrap.wrap(cells[-1], width=max(last_width, 10)) if cells[-1] else []
    prefix = "".join("{:<{w}}".format(c, w=w) for c, w in zip(cells[:-1], widths))
    lines = [prefix + (last[0] if last else "")]
    indent = " " * sum(widths)
    for continuation in last[1:]:
        lines.append(indent + continuation)
    return lines


def format_table(records, columns):
    # type: (list, list) -> list
    """Render records as lines; columns is a list of (key, header) pairs."""
    headers = [h for _, h in columns]
    rows = [[_cell(r.get(k)) for k, _ in columns] for r in records]
    widths = [max([len(h)] + [len(row[i]) for row in rows] + [_MIN_WIDTH]) + 2
              for i, h in enumerate(headers[:-1])]
    term_width = shutil.get_terminal_size((100, 24)).columns
    last_width = max(term_width - sum(widths), 10)

    lines = format_row(headers, widths, last_width)
    lines.append("-" * min(term_width, sum(widths) + max(len(headers[-1]), 10)))
    for row in rows:
        lines.extend(format_row(row, widths, last_width))
    return lines


def print_table(records, columns):
    # type: (list, list) -> None
    for line in format_table(records, columns):
        print(line)


PLAN_COLUMNS = [
    ("quantity", "QUANTITY"),
    ("value", "VALUE"),
    ("unit", "UNIT"),
]

GRID_COLUMNS = [
    ("case", "#"),
    ("annual_cost", "COST EUR"),
    ("violations_degree_hours", "VIOL degCh"),
    ("freq_at_setpoint_pct", "AT SP %"),
    ("building_consumption_kwh", "CONS kWh"),
    ("share_building_lowprice_pct", "LOW-PRICE %"),
    ("label", "CASE"),
]


def plan_summary_records(plan):
    # type: (object) -> list
    """Key figures of a DayPlan as quantity/value/unit records."""
    dt_h = plan.dt_hours
    records = [
        {"quantity": "periods", "value": plan.horizon_len, "unit": ""},
        {"quantity": "electricity cost", "value": plan.electricity_cost, "unit": "EUR"},
        {"quantity": "penalty cost", "value": plan.penalty_cost, "unit": "EUR"},
        {"quantity": "building energy", "value": float(dt_h * plan.building_power.sum()), "unit": "kWh"},
        {"quantity": "room min", "value": float(plan.states[:, plan.state_names.index("room")].min()),
         "unit": "degC"},
        {"quantity": "room max", "value": float(plan.states[:, plan.state_names.index("room")].max()),
         "unit": "degC"},
        {"quantity": "lp iterations", "value": plan.lp_iterations, "unit": ""},
    ]
    for name in plan.load_names:
        records.append({"quantity": "start %s" % name, "value": plan.load_starts[name], "unit": "period"})
    return records
