"""Process a whole notebook document: earlier cells feed later ones.

Cell 0 defines a function, cell 2 applies it row-by-row; the engine resolves
the definition through the accumulated history and rewrites the apply. The
markdown cell and the untouched code cell come back byte-identical.
"""

import json

from cellrw import rewrite_notebook


def code(source: str) -> dict:
    return {
        "cell_type": "code",
        "metadata": {},
        "outputs": [],
        "execution_count": None,
        "source": source,
    }


NOTEBOOK = {
    "cells": [
        code("def tax(row):\n    p = row['price']\n    return p * 0.19\n"),
        {"cell_type": "markdown", "metadata": {}, "source": "## Apply the tax rate"},
        code("df['tax'] = 0\ndf.apply(tax, axis=1)\n"),
        code("df.describe()\n"),
    ],
    "metadata": {},
    "nbformat": 4,
    "nbformat_minor": 5,
}


def main() -> None:
    data = json.dumps(NOTEBOOK, indent=1).encode()
    out, reports = rewrite_notebook(data)

    for report in reports:
        print(f"{report.cell_id}: {report.outcome}"
              + (f" via {[m.rule for m in report.matches]}" if report.matches else ""))

    doc = json.loads(out)
    print()
    print("cell 2 after rewriting:")
    print("".join(doc["cells"][2]["source"]))

    untouched, _ = rewrite_notebook(json.dumps({**NOTEBOOK, "cells": NOTEBOOK["cells"][:1]},
                                               indent=1).encode())
    print("document without matches returned as the original bytes:",
          untouched == json.dumps({**NOTEBOOK, "cells": NOTEBOOK["cells"][:1]}, indent=1).encode())


if __name__ == "__main__":
    main()
