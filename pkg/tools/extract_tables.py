"""One-time curation: convert the LaTeX facet tables into the cell grammar.

Usage:
    python3 tools/extract_tables.py SOURCE OUTDIR

Writes B1.txt, B2.txt and C.txt. Each output cell is re-parsed by
``mdlpoly.facet_tables.expr`` before writing, and the row block carries a
sha256 checksum that the loader verifies.
"""
import hashlib
import re
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from mdlpoly.facet_tables.expr import parse, to_text  # noqa: E402

HEADERS = {
    "B1": ("0<l<1/4, h=1-3l", "l"),
    "B2": ("1/4<h<1/3, l=1-3h", "h"),
    "C": ("1/2<hx<1, 1/2<hy<1, lx=1-hx, ly=1-hy; rows are hyperplanes", "hx,hy"),
}


def _read_group(s, i):
    """Return (content, index after closing brace) for a group opening at s[i]."""
    assert s[i] == "{", s[i:i + 20]
    depth = 0
    for j in range(i, len(s)):
        if s[j] == "{":
            depth += 1
        elif s[j] == "}":
            depth -= 1
            if depth == 0:
                return s[i + 1:j], j + 1
    raise ValueError("unbalanced braces")


def latex_tokens(s):
    """Tokens in the target grammar; a \\frac becomes one parenthesised operand."""
    out = []
    i = 0
    while i < len(s):
        c = s[i]
        if c.isspace() or c == "$":
            i += 1
        elif s.startswith("\\frac", i):
            num, i = _read_group(s, i + 5)
            den, i = _read_group(s, i)
            out.append(("operand", f"(({convert(num)})/({convert(den)}))"))
        elif s.startswith("\\text{hh}", i):
            # garbled cell in B2 row 26, column p(0011); the literal reading
            # (h-1)/(h*h) is violated by MDL vertices, while (h-1)/h gives a facet
            out.append(("operand", "h"))
            i += 9
        elif s.startswith("\\left", i):
            i += 5
        elif s.startswith("\\right", i):
            i += 6
        elif s.startswith("\\ell", i):
            out.append(("operand", "l"))
            i += 4
        elif s.startswith("h_x", i) or s.startswith("h_y", i):
            out.append(("operand", "h" + s[i + 2]))
            i += 3
        elif c == "h":
            out.append(("operand", "h"))
            i += 1
        elif c.isdigit():
            j = i
            while j < len(s) and s[j].isdigit():
                j += 1
            out.append(("operand", s[i:j]))
            i = j
        elif c == "^":
            i += 1
            if s[i] == "{":
                exp, i = _read_group(s, i)
            else:
                exp, i = s[i], i + 1
            out.append(("pow", "^" + exp.strip()))
        elif c == "(":
            out.append(("open", "("))
            i += 1
        elif c == ")":
            out.append(("close", ")"))
            i += 1
        elif c in "+-":
            out.append(("op", c))
            i += 1
        elif c == "{":
            body, i = _read_group(s, i)
            out.append(("operand", f"({convert(body)})"))
        else:
            raise ValueError(f"cannot convert {s[i:i + 30]!r}")
    return out


def convert(s):
    pieces = []
    prev = None
    for kind, text in latex_tokens(s):
        # juxtaposition means multiplication
        if kind in ("operand", "open") and prev in ("operand", "close", "pow"):
            pieces.append("*")
        pieces.append(text)
        prev = kind
    return "".join(pieces)


def table_rows(body):
    rows = []
    for chunk in body.split("\\\\"):
        chunk = chunk.replace("\\hline", "").strip()
        if not chunk or "\\beta" in chunk or "P(0000)" in chunk:
            continue
        cells = [c.strip() for c in chunk.split("&")]
        label = len(rows) + 1
        if len(cells) == 17:
            label = int(cells[0])
            cells = cells[1:]
        if len(cells) != 16:
            raise ValueError(f"row with {len(cells)} cells: {chunk[:60]!r}")
        rows.append((label, [to_text(parse(convert(c))) for c in cells]))
    return rows


def main(source, outdir):
    text = Path(source).read_text()
    bodies = re.findall(r"\\begin\{tabular\}\{[^}]*\}(.*?)\\end\{tabular\}", text, re.S)
    assert len(bodies) == 5, len(bodies)
    groups = {"B1": bodies[0] + "\\\\" + bodies[1],
              "B2": bodies[2] + "\\\\" + bodies[3],
              "C": bodies[4]}
    outdir = Path(outdir)
    for name, body in groups.items():
        rows = table_rows(body)
        lines = ["; ".join(cells) + f"  # {label}" for label, cells in rows]
        digest = hashlib.sha256("\n".join(lines).encode()).hexdigest()
        domain, params = HEADERS[name]
        header = [f"# table: {name}", f"# domain: {domain}", f"# parameters: {params}",
                  f"# rows: {len(rows)}", f"# sha256: {digest}",
                  "# columns: p(abxy) for (a,b,x,y) with a fastest: "
                  "0000 1000 0100 1100 0010 1010 0110 1110 0001 1001 0101 1101 0011 1011 0111 1111"]
        (outdir / f"{name}.txt").write_text("\n".join(header + lines) + "\n")
        print(name, len(rows))


if __name__ == "__main__":
    main(*sys.argv[1:])
