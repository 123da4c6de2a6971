# Query parameters that may repeat; every other one is read as a single value.
REPEATABLE = ('point', 'clause')

# The api only computes; anything that writes files stays on the command line.
BLOCKED = ('metric_file', 'output', 'dump', 'fit', 'format')


def query_options(query_params):
    options = {}
    for key in query_params:
        name = key.replace('-', '_')
        if name in BLOCKED:
            continue
        if name in REPEATABLE:
            options[name] = query_params.getlist(key)
        else:
            options[name] = query_params.get(key)
    return options
