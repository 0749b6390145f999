import os
import tempfile

def atomic_write(path:str, data, binary:bool=False):
    """
    Write a file by writing a temporary sibling and renaming it over the target

    Parameters:
        path (str): Target path
        data (str or bytes): Content
        binary (bool): Write bytes instead of text
    """
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "wb" if binary else "w", **({} if binary else {"newline": ""})) as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise
