"""Pure-Python pair-enumeration kernel, used when the extension is not built."""


def pair_bytes(map_nodes, reduce_nodes, node_racks, weights, per_map, overhead,
               cross_rack_weight):
    """Sum shuffle bytes over every (map, reduce) pair.

    Returns ``(remote_data, remote_overhead, local)``: intermediate bytes that
    cross a node boundary (cross-rack pairs scaled by ``cross_rack_weight``),
    the per-pair overhead charged to those remote transfers, and the bytes that
    stay on their node.
    """
    map_nodes = [int(x) for x in map_nodes]
    reduce_nodes = [int(x) for x in reduce_nodes]
    racks = [int(x) for x in node_racks]
    weights = [float(x) for x in weights]
    per_map = float(per_map)
    overhead = float(overhead)
    cross_rack_weight = float(cross_rack_weight)
    if len(weights) != len(reduce_nodes):
        raise ValueError("weights must have one entry per reduce task")

    data = 0.0
    ovh = 0.0
    local = 0.0
    pairs = list(zip(reduce_nodes, weights))
    for a in map_nodes:
        rack_a = racks[a]
        for b, w in pairs:
            nbytes = per_map * w
            if a == b:
                local += nbytes
            else:
                f = cross_rack_weight if racks[b] != rack_a else 1.0
                data += nbytes * f
                ovh += overhead * f
    return data, ovh, local
