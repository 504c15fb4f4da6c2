function route(kind) {
    switch (kind) {
        case "get":
            return fetchIt();
            logNever();
        case "put":
            saveIt();
            break;
        default:
            dropIt();
    }
    return 0;
}
