"""Pure-Python versions of the hot loops; used when the extension is absent."""

from __future__ import annotations


def lossless_assignments(weights, num_edges, capacity):
    """Every assignment of items to edges that keeps each edge load <= capacity.

    ``weights`` are non-negative integers.  Returns a list of tuples giving the
    edge index of each item, in lexicographic order.
    """
    weights = [int(w) for w in weights]
    count = len(weights)
    if count == 0:
        return [()]
    loads = [0] * num_edges
    choice = [0] * count
    out = []
    depth = 0
    choice[0] = -1
    while depth >= 0:
        # undo the previous placement of this item, if any
        prev = choice[depth]
        if prev >= 0:
            loads[prev] -= weights[depth]
        nxt = prev + 1
        w = weights[depth]
        while nxt < num_edges and loads[nxt] + w > capacity:
            nxt += 1
        if nxt == num_edges:
            choice[depth] = -1
            depth -= 1
            continue
        choice[depth] = nxt
        loads[nxt] += w
        if depth == count - 1:
            out.append(tuple(choice))
        else:
            depth += 1
            choice[depth] = -1
    return out


def excess_integral(times, loads, caps):
    """Sum over edges of the integral of max(0, load - cap) over time.

    ``times`` has one more breakpoint than ``loads`` has rows; row ``k`` holds
    the per-edge load on ``[times[k], times[k+1])``.
    """
    total = 0.0
    for k in range(len(times) - 1):
        dt = float(times[k + 1] - times[k])
        if dt <= 0.0:
            continue
        row = loads[k]
        seg = 0.0
        for e in range(len(caps)):
            over = row[e] - caps[e]
            if over > 0:
                seg += float(over)
        total += seg * dt
    return total
