# HTTP routers for translation, evaluation and checking
