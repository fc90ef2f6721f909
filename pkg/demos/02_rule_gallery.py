"""Run every builtin rule once over a cell shaped like its target pattern.

The apply rules need to see the function definition, so those cells carry
their def in the same source; everything else is a one-liner.
"""

from cellrw import builtin_rules, rewrite_cell

GALLERY = [
    ("nsmallest", "df['A'].sort_values().head(5)\n"),
    ("concat-lists", "pd.Series(df['A'].tolist() + df['B'].tolist())\n"),
    ("str-split-loop", "df[['a', 'b']] = df['C'].str.split('(', 1, expand=True)\n"),
    (
        "apply-direct",
        "def weighted_rating(x, m=m, C=C):\n"
        "    v = x['vote_count']\n"
        "    R = x['vote_average']\n"
        "    return (v/(v+m) * R) + (m/(m+v) * C)\n"
        "\n"
        "df.apply(weighted_rating, axis=1)\n",
    ),
    (
        "apply-select",
        "def foo(row):\n"
        "    if row['A'] == row['B'] and row['A'] < row['C']:\n"
        "        return 'X'\n"
        "    elif row['A'].startswith('Y'):\n"
        "        return 'Y'\n"
        "    elif row['B'] in ls:\n"
        "        return 'Z'\n"
        "    else:\n"
        "        return 'NA'\n"
        "\n"
        "df.apply(foo, axis=1)\n",
    ),
    ("substr-contains", "hits = df['title'].apply(lambda x: 'Star' in x)\n"),
]


def main() -> None:
    rules = {rule.id: rule for rule in builtin_rules().active()}
    for rule_id, cell in GALLERY:
        print("=" * 72)
        print(f"rule {rule_id}: {rules[rule_id].summary}")
        print("-" * 72)
        print(cell)
        result = rewrite_cell(cell, cell_id=rule_id)
        matched = [m.rule for m in result.report.matches]
        assert matched == [rule_id], (rule_id, matched)
        print("-> rewritten:")
        print(result.source)


if __name__ == "__main__":
    main()
