from .worker_thread import WorkerThread, pyqt
