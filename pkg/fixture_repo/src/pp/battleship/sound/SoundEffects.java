package pp.battleship.sound;

import java.util.HashMap;
import java.util.Map;

/**
 * One-shot sound effect registry; effects are addressed by symbolic name.
 */
public class SoundEffects {
    private final Map<String, String> samples = new HashMap<>();
    private boolean enabled = true;

    public void register(String name, String assetPath) {
        samples.put(name, assetPath);
    }

    public void play(String name) {
        if (!enabled || !samples.containsKey(name)) {
            return;
        }
        // actual playback handled by the engine backend
    }

    public boolean isEnabled() {
        return enabled;
    }

    public void setEnabled(boolean enabled) {
        this.enabled = enabled;
    }
}
