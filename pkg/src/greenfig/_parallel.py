from concurrent.futures import ThreadPoolExecutor


def chunk_bounds(n, size):
    return [(lo, min(lo + size, n)) for lo in range(0, n, size)]


def map_chunks(fn, n, size, threads=1):
    """Apply ``fn(lo, hi)`` over ``[0, n)`` in chunks; results keep chunk order.

    numpy releases the GIL inside ufuncs, so threads buy real overlap. Callers
    only combine the results with order-independent reductions (OR, fsum).
    """
    bounds = chunk_bounds(n, size)
    if threads <= 1 or len(bounds) <= 1:
        return [fn(lo, hi) for lo, hi in bounds]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda b: fn(*b), bounds))
