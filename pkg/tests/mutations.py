"""Single-token mutations of strategy scripts, used by the parser tests."""

from constructibility.lang import tokenize

STATEMENT_HEADS = {"let", "request", "output", "assert"}


def statement_lines(tokens):
    """Lines whose first token starts a simple statement."""
    firsts = {}
    for t in tokens:
        if t.kind != "eof":
            firsts.setdefault(t.line, t)
    return {line for line, t in firsts.items() if t.text in STATEMENT_HEADS}


def mutations(source):
    """Yield (line, mutated_source) for each deletion and adjacent swap on a statement line."""
    tokens, _ = tokenize(source)
    lines = statement_lines(tokens)
    real = [t for t in tokens if t.kind != "eof"]
    for k, t in enumerate(real):
        if t.line not in lines:
            continue
        yield t.line, source[: t.offset] + source[t.offset + len(t.text):]
        if k + 1 < len(real) and real[k + 1].line == t.line:
            u = real[k + 1]
            mid = source[t.offset + len(t.text): u.offset]
            swapped = source[: t.offset] + u.text + mid + t.text + source[u.offset + len(u.text):]
            if swapped != source:
                yield t.line, swapped
