"""
Copyright (c) 2020 Nathan Telles

This Source Code Form is subject to the terms of the Mozilla Public
License, v. 2.0. If a copy of the MPL was not distributed with this
file, You can obtain one at http://mozilla.org/MPL/2.0/.
"""

import multiprocessing as mp
import shlex
import sys
from typing import List
from typing import Optional as Opt

from .logger import log_session
from .shell import Shell


def main(argv: Opt[List[str]] = None) -> int:
    """Run one command from argv, or the interactive shell without one."""

    argv = sys.argv[1:] if argv is None else argv
    with log_session('spillover') as log_q:
        shl = Shell(log_q=log_q)
        if argv:
            shl.onecmd(shl.precmd(' '.join(shlex.quote(a) for a in argv)))
            return shl.exit_code
        try:
            shl.cmdloop()
        except (KeyboardInterrupt, SystemExit):
            shl.do_exit('')
    return 0


if __name__ == '__main__':
    mp.set_start_method('spawn')
    sys.exit(main())
