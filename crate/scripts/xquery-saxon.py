#!/usr/bin/env python3
"""Runs an XQuery file with Saxon-HE (saxonche) and prints the result.

Usage: xquery-saxon.py QUERY_FILE BASE_DIR

Relative doc() URIs resolve against BASE_DIR. Suitable as
XOLAP_XQUERY_CMD='python3 scripts/xquery-saxon.py {query_file} {base_dir}'.
"""
import os
import sys

from saxonche import PySaxonProcessor


def main() -> int:
    if len(sys.argv) != 3:
        print(__doc__, file=sys.stderr)
        return 2
    query_file, base_dir = sys.argv[1], os.path.abspath(sys.argv[2])
    with open(query_file, encoding="utf-8") as f:
        query = f.read()
    with PySaxonProcessor(license=False) as proc:
        xq = proc.new_xquery_processor()
        xq.set_query_base_uri("file://" + base_dir.rstrip("/") + "/")
        xq.set_query_content(query)
        try:
            out = xq.run_query_to_string()
        except Exception as e:  # saxonche raises PySaxonApiError
            print(e, file=sys.stderr)
            return 1
        if out is None:
            print(xq.error_message or "query failed", file=sys.stderr)
            return 1
    sys.stdout.write(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
