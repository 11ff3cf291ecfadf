import queue
from threading import Thread

from utils.logging import LazyForecastLogger

logger = LazyForecastLogger(__name__)


class AsyncTask(Thread):

    def __init__(self, obj, func, args=None, kwargs=None):
        self.obj = obj
        self.func = func
        self.args = args if args is not None else []
        self.kwargs = kwargs if kwargs is not None else {}
        self.result = None
        self.error = None
        super(AsyncTask, self).__init__(daemon=True)

    def run(self):
        func = getattr(self.obj, self.func) if isinstance(self.func, str) else self.func
        try:
            self.result = func(*self.args, **self.kwargs)
        except Exception as ex:
            self.error = ex

    def stop(self):
        self.join()
        if self.error is not None:
            raise self.error
        return self.result


class TaskPool(object):
    """
    Runs keyed callables on `workers` threads. Idle workers pull the next pending task
    from a shared queue, so long tasks do not hold back the rest of the grid.
    Results (or the raised exceptions) are returned in a dict keyed like the input.
    """

    def __init__(self, workers: int = 1, progress=None):
        if workers < 1:
            raise ValueError("workers should be at least 1")
        self.workers = workers
        self.progress = progress

    def run(self, tasks: dict) -> dict:
        keys = sorted(tasks.keys(), key=str)
        results = {}
        if self.workers == 1:
            for key in keys:
                results[key] = self.__execute(tasks[key])
                self.__tick()
            return results

        pending = queue.Queue()
        for key in keys:
            pending.put(key)

        def worker():
            while True:
                try:
                    key = pending.get_nowait()
                except queue.Empty:
                    return
                results[key] = self.__execute(tasks[key])
                self.__tick()

        threads = [AsyncTask(None, worker) for _ in range(min(self.workers, len(keys)))]
        for thread in threads:
            thread.start()
        for thread in threads:
            thread.stop()
        return results

    @staticmethod
    def __execute(task):
        try:
            return task()
        except Exception as ex:
            logger.debug("Task failed: %s", ex)
            return ex

    def __tick(self):
        if self.progress is not None:
            self.progress.update(1)
