"""
Thin wrapper that lets long procedures (training, corpus generation) run either as a Qt thread
emitting progress signals, or synchronously when PyQt5 is not installed.
"""
import importlib.util as iutil

spec = iutil.find_spec("PyQt5")
pyqt = spec is not None
if pyqt:
    from PyQt5.QtCore import QThread
    from PyQt5.QtCore import pyqtSignal
else:
    class QThread:
        def __init__(self, *arg):
            pass


class WorkerThread(QThread):
    if pyqt:
        jobFinished = pyqtSignal(object)

    def __init__(self, parentThread):
        QThread.__init__(self, parentThread)
        self.running = False

    def run(self):
        self.running = True
        success = self.doWork()
        self.running = False
        if pyqt:
            self.jobFinished.emit(success)

    def stop(self):
        self.running = False

    def doWork(self):
        return True
