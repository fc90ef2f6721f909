"""Rewrite one notebook cell and show exactly what changed and why."""

from cellrw import explain, rewrite_cell

CELL = "top_scores = df['score'].sort_values().head(5)\n"


def main() -> None:
    result = rewrite_cell(CELL, cell_id="demo")

    print("original cell:")
    print(CELL)
    print("rewritten cell:")
    print(result.source)
    print("report:", result.report.to_json())
    print()
    print("explanation (--diff view):")
    print(explain(CELL))


if __name__ == "__main__":
    main()
