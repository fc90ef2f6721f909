"""Stream the per-cell reports over a mixed corpus and summarize latency.

Reports go to notebooks dashboards as NDJSON; the timing fields let a session
decide whether the rewriter stays within its interactive budget.
"""

import json
import math
from pathlib import Path

from cellrw import rewrite_cell

CORPUS = Path(__file__).parent.parent / "tests" / "data" / "passthrough_cells.json"

EXTRA = [
    "df['A'].sort_values().head(5)\n",
    "pd.Series(df['A'].tolist() + df['B'].tolist())\n",
    "a, b = df['C'].str.split('(', 1, expand=True)\n",
]


def main() -> None:
    cells = json.loads(CORPUS.read_text()) + EXTRA
    rewrite_cell(cells[0])  # warm-up

    costs_ms = []
    outcomes: dict[str, int] = {}
    for i, cell in enumerate(cells):
        report = rewrite_cell(cell, cell_id=f"cell-{i}").report
        print(json.dumps(report.to_json()))
        outcomes[report.outcome] = outcomes.get(report.outcome, 0) + 1
        costs_ms.append((report.timings_us["match"] + report.timings_us["codegen"]) / 1000.0)

    worst = max(costs_ms)
    geomean = math.exp(sum(math.log(max(c, 1e-3)) for c in costs_ms) / len(costs_ms))
    print()
    print(f"cells: {len(cells)}  outcomes: {outcomes}")
    print(f"match+codegen latency: worst {worst:.3f} ms, geomean {geomean:.3f} ms")


if __name__ == "__main__":
    main()
