"""
Copyright (c) 2020 Nathan Telles

This Source Code Form is subject to the terms of the Mozilla Public
License, v. 2.0. If a copy of the MPL was not distributed with this
file, You can obtain one at http://mozilla.org/MPL/2.0/.
"""

import queue
from multiprocessing import Queue
from typing import Iterator, Tuple


def drain_queue(q: Queue) -> None:
    try:
        while True:
            q.get_nowait()
    except queue.Empty:
        pass


def chunk_ranges(start: int, stop: int, size: int
                 ) -> Iterator[Tuple[int, int]]:
    """Split [start, stop) into consecutive half-open ranges of size."""

    for lo in range(start, stop, size):
        yield lo, min(lo + size, stop)
