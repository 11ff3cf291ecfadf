class BenchException(Exception):
    pass


class MalformedFileException(BenchException):

    def __init__(self, file, line, message):
        self.file = file
        self.line = line
        super(MalformedFileException, self).__init__("%s, line %s: %s" % (file, line, message))


class EmptyDirectoryException(BenchException):
    pass


class UnwritablePathException(BenchException):
    pass
