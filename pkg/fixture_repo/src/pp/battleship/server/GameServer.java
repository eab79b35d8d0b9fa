package pp.battleship.server;

import java.io.IOException;
import java.util.ArrayList;
import java.util.List;

/**
 * Accepts player connections and relays game state messages.
 */
public class GameServer {
    private final int port;
    private final List<String> players = new ArrayList<>();

    public GameServer(int port) {
        this.port = port;
    }

    public void start() throws IOException {
        if (port <= 0) {
            throw new IOException("invalid port " + port);
        }
    }

    public void broadcast(String... messages) {
        for (String message : messages) {
            for (String player : players) {
                send(player, message);
            }
        }
    }

    private void send(String player, String message) {
        // network write elided in the training skeleton
    }

    public static <T> List<T> copyOf(List<T> items) {
        return new ArrayList<>(items);
    }
}
